//! Khatri-Rao products, unfoldings and mode products on a small CP tensor.

use ris_chanest::tensor::{ComplexMatrix, DenseTensor};
use ris_chanest::Complex64;

fn ramp(rows: usize, cols: usize, phase: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |i, j| Complex64::from_polar(1.0 + i as f64, phase * (j + 1) as f64))
}

fn main() -> ris_chanest::Result<()> {
    let (g, h, s, e) = (ramp(3, 2, 0.3), ramp(2, 2, -0.7), ramp(4, 2, 1.1), ramp(2, 2, 0.2));

    // I x1 G x2 H x3 S x4 E
    let mut y = DenseTensor::identity(4, 2)?;
    for (mode, f) in [&g, &h, &s, &e].into_iter().enumerate() {
        y = y.mode_product(f, mode)?;
    }
    println!("tensor dims {:?}, ||Y|| = {:.4}", y.dims(), y.frobenius_norm());

    // mode-0 unfolding equals G (E kr S kr H)^T
    let kr = e.khatri_rao(&s)?.khatri_rao(&h)?;
    let direct = g.matmul(&kr.transpose())?;
    let gap = y.unfold(0)?.sub(&direct)?.frobenius_norm();
    println!("||Y_(0) - G (E kr S kr H)^T|| = {gap:.2e}");

    let back = DenseTensor::fold(&y.unfold(2)?, 2, y.dims())?;
    println!("fold(unfold) round trip exact: {}", back == y);
    Ok(())
}

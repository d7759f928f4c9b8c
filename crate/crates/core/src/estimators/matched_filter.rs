use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scenario::ActivationPattern;
use crate::tensor::{lstsq, ComplexMatrix, DenseTensor};

/// Tolerance on `||S^H S - K I||_F / K` for the conjugate shortcut.
const ORTHOGONAL_TOL: f64 = 1e-10;

/// Strips the activation pattern: `Ỹ = [Y]_(3)^T (S^T)^†`, an `LMP x N`
/// matrix whose row `l + L m + L M p` holds `g_l h_m e_p` per column in the
/// noiseless case.
///
/// When `S^H S = K I` (the DFT design), the pseudo-inverse is `conj(S) / K`
/// and is applied directly on the tensor; otherwise a QR least-squares solve
/// is used.
pub fn matched_filter(y: &DenseTensor, s: &ActivationPattern) -> Result<ComplexMatrix> {
    if y.order() != 4 {
        return Err(Error::Dimension(format!("received tensor must be order 4, got {}", y.order())));
    }
    let [l, m, k, p] = [y.dims()[0], y.dims()[1], y.dims()[2], y.dims()[3]];
    let (sk, n) = s.s.shape();
    if sk != k {
        return Err(Error::Dimension(format!("pattern has {sk} blocks, tensor has {k}")));
    }
    if k < n {
        return Err(Error::identifiability(k, n));
    }

    let gram = s.s.adjoint_matmul(&s.s)?;
    let scaled_identity = ComplexMatrix::identity(n).scale(Complex64::new(k as f64, 0.0));
    if gram.sub(&scaled_identity)?.frobenius_norm() <= ORTHOGONAL_TOL * k as f64 {
        return Ok(conjugate_filter(y, &s.s, [l, m, k, p]));
    }

    // transpose of the mode-2 unfolding equals min ||Y3 - S Z^T|| in Z
    let y3 = y.unfold(2)?;
    let ls = lstsq(&s.s, &y3)?;
    if !ls.deficient.is_empty() {
        return Err(Error::Identifiability(format!(
            "activation pattern is rank deficient (dependent columns {:?})",
            ls.deficient
        )));
    }
    Ok(ls.solution.transpose())
}

fn conjugate_filter(y: &DenseTensor, s: &ComplexMatrix, [l, m, k, p]: [usize; 4]) -> ComplexMatrix {
    let n = s.cols();
    let lm = l * m;
    let inv_k = 1.0 / k as f64;
    let data = y.as_slice();
    let mut out = ComplexMatrix::zeros(lm * p, n);
    for col in 0..n {
        let weights: Vec<Complex64> = s.col(col).iter().map(|z| z.conj() * inv_k).collect();
        let dst = out.col_mut(col);
        for pp in 0..p {
            let block = &mut dst[pp * lm..(pp + 1) * lm];
            for (kk, w) in weights.iter().enumerate() {
                let src = &data[(pp * k + kk) * lm..(pp * k + kk + 1) * lm];
                for (d, &v) in block.iter_mut().zip(src) {
                    *d += v * w;
                }
            }
        }
    }
    out
}

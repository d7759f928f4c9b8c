use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Solution of `min ||A X - B||_F` by Householder QR.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub solution: ComplexMatrix,
    /// Columns of `A` found linearly dependent on earlier ones; the matching
    /// rows of the solution are set to zero.
    pub deficient: Vec<usize>,
}

/// Relative pivot threshold below which a column of `A` counts as dependent.
pub const RANK_TOL: f64 = 1e-12;

pub fn lstsq(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<LeastSquares> {
    let (m, n) = a.shape();
    if b.rows() != m {
        return Err(Error::Dimension(format!(
            "least squares with a {m}x{n} design and {}x{} targets",
            b.rows(),
            b.cols()
        )));
    }
    if m < n {
        return Err(Error::Dimension(format!("underdetermined {m}x{n} least-squares system")));
    }
    let mut r = a.clone();
    let mut qb = b.clone();
    let scale = (0..n).map(|c| column_norm(&r, c, 0)).fold(0.0, f64::max);
    let mut deficient = Vec::new();
    // (row, column) of every accepted pivot
    let mut pivots: Vec<(usize, usize)> = Vec::with_capacity(n);

    for j in 0..n {
        let row = pivots.len();
        let alpha = column_norm(&r, j, row);
        if alpha == 0.0 || alpha <= RANK_TOL * scale {
            deficient.push(j);
            continue;
        }
        // Householder vector v = x + e^{i arg x0} ||x|| e1
        let x0 = r[(row, j)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let mut v: Vec<Complex64> = (row..m).map(|i| r[(i, j)]).collect();
        v[0] += phase * alpha;
        let vnorm_sqr: f64 = v.iter().map(Complex64::norm_sqr).sum();
        reflect(&mut r, &v, vnorm_sqr, row, j);
        reflect(&mut qb, &v, vnorm_sqr, row, 0);
        pivots.push((row, j));
    }

    let mut x = ComplexMatrix::zeros(n, b.cols());
    for col in 0..b.cols() {
        for (idx, &(row, j)) in pivots.iter().enumerate().rev() {
            let mut acc = qb[(row, col)];
            for &(_, jj) in &pivots[idx + 1..] {
                acc -= r[(row, jj)] * x[(jj, col)];
            }
            x[(j, col)] = acc / r[(row, j)];
        }
    }
    Ok(LeastSquares { solution: x, deficient })
}

/// Upper-triangular `R` (`n x n`) of a Householder QR of a tall `a`. Zero
/// columns are passed over, so `R^H R = A^H A` holds for any rank.
pub(crate) fn triangular_factor(a: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut r = a.clone();
    for j in 0..n {
        let alpha = column_norm(&r, j, j);
        if alpha == 0.0 {
            continue;
        }
        let x0 = r[(j, j)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let mut v = r.col(j)[j..].to_vec();
        v[0] += phase * alpha;
        let vnorm_sqr: f64 = v.iter().map(Complex64::norm_sqr).sum();
        reflect(&mut r, &v, vnorm_sqr, j, j);
    }
    ComplexMatrix::from_fn(n, n, |i, k| if i <= k { r[(i, k)] } else { Complex64::new(0.0, 0.0) })
}

fn column_norm(m: &ComplexMatrix, col: usize, from_row: usize) -> f64 {
    m.col(col)[from_row..].iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// Applies `I - 2 v v^H / (v^H v)` to rows `row0..` of columns `col0..`.
fn reflect(m: &mut ComplexMatrix, v: &[Complex64], vnorm_sqr: f64, row0: usize, col0: usize) {
    for c in col0..m.cols() {
        let col = &mut m.col_mut(c)[row0..];
        let dot: Complex64 = v.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
        let f = dot * (2.0 / vnorm_sqr);
        for (y, a) in col.iter_mut().zip(v) {
            *y -= f * a;
        }
    }
}

/// Solves `min ||Y - X Z^T||_F` for `X`, i.e. `X = Y (Z^T)^†` for a tall `Z`.
pub fn solve_right_transpose(y: &ComplexMatrix, z: &ComplexMatrix) -> Result<LeastSquares> {
    if y.cols() != z.rows() {
        return Err(Error::Dimension(format!(
            "Y is {}x{} but Z^T is {}x{}",
            y.rows(),
            y.cols(),
            z.cols(),
            z.rows()
        )));
    }
    let ls = lstsq(z, &y.transpose())?;
    Ok(LeastSquares { solution: ls.solution.transpose(), deficient: ls.deficient })
}

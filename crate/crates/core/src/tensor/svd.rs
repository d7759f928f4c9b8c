//! Complex SVD by one-sided (Hestenes) Jacobi rotations, plus the dominant
//! triple and the third-order HOSVD built on it.

use num_complex::Complex64;

use super::dense::DenseTensor;
use super::lstsq::triangular_factor;
use super::matrix::{dotc, norm2, ComplexMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Thin SVD `a = u * diag(sigma) * v^H` with `k = min(rows, cols)` triples,
/// singular values in decreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

/// One singular triple.
#[derive(Clone, Debug)]
pub struct SvdTriple {
    pub u: Vec<Complex64>,
    pub sigma: f64,
    pub v: Vec<Complex64>,
}

/// Orthogonalizes the columns of `a` in place and returns the accumulated
/// unitary `v` such that `a_in * v = a_out`.
fn hestenes(a: &mut ComplexMatrix) -> ComplexMatrix {
    let n = a.cols();
    let mut v = ComplexMatrix::identity(n);
    if n < 2 {
        return v;
    }
    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        let mut norms: Vec<f64> = (0..n).map(|c| a.col(c).iter().map(Complex64::norm_sqr).sum()).collect();
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                let gamma = dotc(a.col(p), a.col(q));
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate (a_p, e^{-i phi} a_q) as a real pair
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate_cols(a, p, q, cs, sn, phase);
                rotate_cols(&mut v, p, q, cs, sn, phase);
                norms[p] = (alpha - t * g).max(0.0);
                norms[q] = beta + t * g;
            }
        }
        if !rotated {
            break;
        }
    }
    v
}

fn rotate_cols(m: &mut ComplexMatrix, p: usize, q: usize, cs: f64, sn: f64, phase: Complex64) {
    let pc = phase.conj();
    let (xp, xq) = m.col_pair_mut(p, q);
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let x = *a;
        let y = *b * pc;
        *a = x * cs - y * sn;
        *b = x * sn + y * cs;
    }
}

/// Thin SVD of any matrix.
pub fn svd(a: &ComplexMatrix) -> Svd {
    if a.rows() >= a.cols() {
        let (u, sigma, v) = tall_svd(a);
        Svd { u, sigma, v }
    } else {
        // a^H = U' S V'^H  =>  a = V' S U'^H
        let (u, sigma, v) = tall_svd(&a.adjoint());
        Svd { u: v, sigma, v: u }
    }
}

/// Strictly tall inputs are first reduced to their triangular QR factor, which
/// has the same right singular vectors; the rotations then run on `n x n`.
fn tall_svd(a: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    if a.rows() > a.cols() && a.cols() > 1 {
        let mut r = triangular_factor(a);
        let v = hestenes(&mut r);
        let av = a.matmul(&v).expect("conformant by construction");
        extract(&av, &v)
    } else {
        let mut work = a.clone();
        let v = hestenes(&mut work);
        extract(&work, &v)
    }
}

/// Normalizes orthogonalized columns and sorts by decreasing norm. Columns
/// with zero norm get an orthonormal completion so `u` stays orthonormal.
fn extract(work: &ComplexMatrix, v: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let n = work.cols();
    let norms: Vec<f64> = (0..n).map(|c| norm2(work.col(c))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let sigma: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let tiny = sigma.first().copied().unwrap_or(0.0) * f64::EPSILON * (work.rows().max(n) as f64);
    let mut ucols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for (&i, &s) in order.iter().zip(&sigma) {
        if s > tiny && s > 0.0 {
            ucols.push(work.col(i).iter().map(|z| z / s).collect());
        }
    }
    let u = complete_basis(&mut ucols, work.rows(), n);
    (u, sigma, v.select_columns(&order))
}

/// Extends a set of orthonormal columns to `target` columns in `C^dim` by
/// Gram-Schmidt against the standard basis.
fn complete_basis(cols: &mut Vec<Vec<Complex64>>, dim: usize, target: usize) -> ComplexMatrix {
    let mut e = 0;
    while cols.len() < target && e < dim {
        let mut cand = vec![Complex64::new(0.0, 0.0); dim];
        cand[e] = Complex64::new(1.0, 0.0);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for c in cols.iter() {
                let proj = dotc(c, &cand);
                for (x, y) in cand.iter_mut().zip(c) {
                    *x -= proj * y;
                }
            }
        }
        let nrm = norm2(&cand);
        if nrm > 1e-8 {
            cols.push(cand.iter().map(|z| z / nrm).collect());
        }
        e += 1;
    }
    ComplexMatrix::from_columns(cols).expect("equal-length basis vectors")
}

/// Full left singular basis (`rows x rows` unitary) ordered by decreasing
/// singular value.
pub fn left_singular_basis(a: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>)> {
    let s = svd(a);
    if s.sigma.first().copied().unwrap_or(0.0) == 0.0 {
        return Err(Error::Degenerate("all-zero matrix has no singular basis".into()));
    }
    let rows = a.rows();
    if s.u.cols() == rows {
        return Ok((s.u, s.sigma));
    }
    let mut cols: Vec<Vec<Complex64>> = (0..s.u.cols()).map(|c| s.u.col(c).to_vec()).collect();
    Ok((complete_basis(&mut cols, rows, rows), s.sigma))
}

/// Best rank-one approximation `sigma * u * v^H`.
pub fn dominant_svd(a: &ComplexMatrix) -> Result<SvdTriple> {
    if a.as_slice().iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::Degenerate("dominant SVD of an all-zero matrix".into()));
    }
    let s = svd(a);
    Ok(SvdTriple { u: s.u.col(0).to_vec(), sigma: s.sigma[0], v: s.v.col(0).to_vec() })
}

/// Full HOSVD of a third-order tensor.
#[derive(Clone, Debug)]
pub struct Hosvd3 {
    pub core: DenseTensor,
    /// Unitary factors, one per mode, columns ordered by decreasing mode-n
    /// singular value.
    pub factors: [ComplexMatrix; 3],
    pub mode_singular_values: [Vec<f64>; 3],
}

impl Hosvd3 {
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        self.core
            .mode_product(&self.factors[0], 0)?
            .mode_product(&self.factors[1], 1)?
            .mode_product(&self.factors[2], 2)
    }
}

pub fn hosvd3(t: &DenseTensor) -> Result<Hosvd3> {
    if t.order() != 3 {
        return Err(Error::Argument(format!("HOSVD3 needs an order-3 tensor, got order {}", t.order())));
    }
    if t.frobenius_norm_sqr() == 0.0 {
        return Err(Error::Degenerate("HOSVD of the zero tensor".into()));
    }
    let (u0, s0) = left_singular_basis(&t.unfold(0)?)?;
    let (u1, s1) = left_singular_basis(&t.unfold(1)?)?;
    let (u2, s2) = left_singular_basis(&t.unfold(2)?)?;
    let core = t
        .mode_product(&u0.adjoint(), 0)?
        .mode_product(&u1.adjoint(), 1)?
        .mode_product(&u2.adjoint(), 2)?;
    Ok(Hosvd3 { core, factors: [u0, u1, u2], mode_singular_values: [s0, s1, s2] })
}

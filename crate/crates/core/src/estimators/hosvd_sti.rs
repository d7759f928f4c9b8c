use num_complex::Complex64;
use rayon::prelude::*;

use super::{matched_filter, FactorEstimates, Method};
use crate::error::{Error, Result};
use crate::scenario::ActivationPattern;
use crate::tensor::{dominant_svd, dotc, ComplexMatrix, DenseTensor};

/// Columns of `Ỹ` with norm below this fraction of `||Ỹ||_F` are treated as
/// unobservable.
pub const DEGENERATE_REL_TOL: f64 = 1e-12;

/// Principal complex cube root: modulus^(1/3) with the argument divided by 3.
pub fn principal_cbrt(z: Complex64) -> Complex64 {
    let (r, theta) = z.to_polar();
    Complex64::from_polar(r.cbrt(), theta / 3.0)
}

/// Rank-one triple `(g, h, e)` of one `L x M x P` column tensor, read off its
/// HOSVD: the dominant mode singular vectors each scaled by the cube root of
/// the leading core entry.
///
/// Only the leading core entry `T x1 u0^H x2 u1^H x3 u2^H` is formed; it equals
/// `hosvd3(t).core[0]`.
pub fn rank_one_column(
    column: &[Complex64],
    [l, m, p]: [usize; 3],
) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
    let t = DenseTensor::from_vec(&[l, m, p], column.to_vec())?;
    let u0 = dominant_svd(&t.unfold(0)?)?.u;
    let u1 = dominant_svd(&t.unfold(1)?)?.u;
    let u2 = dominant_svd(&t.unfold(2)?)?.u;
    let mut core0 = Complex64::new(0.0, 0.0);
    for (pi, slab) in column.chunks_exact(l * m).enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (mi, fiber) in slab.chunks_exact(l).enumerate() {
            acc += u1[mi].conj() * dotc(&u0, fiber);
        }
        core0 += u2[pi].conj() * acc;
    }
    let root = principal_cbrt(core0);
    let lead = |u: Vec<Complex64>| u.into_iter().map(|z| z * root).collect::<Vec<_>>();
    Ok((lead(u0), lead(u1), lead(u2)))
}

type ColumnResult = Result<Option<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)>>;

fn solve_column(y_tilde: &ComplexMatrix, col: usize, dims: [usize; 3], floor: f64) -> ColumnResult {
    let column = y_tilde.col(col);
    let norm = column.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    if norm <= floor || norm == 0.0 {
        return Ok(None);
    }
    rank_one_column(column, dims).map(Some)
}

fn check_rows(y_tilde: &ComplexMatrix, [l, m, p]: [usize; 3]) -> Result<()> {
    if y_tilde.rows() != l * m * p {
        return Err(Error::Dimension(format!(
            "Ỹ has {} rows, expected L*M*P = {}",
            y_tilde.rows(),
            l * m * p
        )));
    }
    Ok(())
}

fn assemble(results: Vec<ColumnResult>, [l, m, p]: [usize; 3]) -> Result<FactorEstimates> {
    let n = results.len();
    let mut g_hat = ComplexMatrix::zeros(l, n);
    let mut h_hat = ComplexMatrix::zeros(m, n);
    let mut e_hat = ComplexMatrix::zeros(p, n);
    let mut degenerate = Vec::new();
    for (col, res) in results.into_iter().enumerate() {
        match res.map_err(|e| Error::DegenerateColumn { column: col, reason: e.to_string() })? {
            Some((g, h, e)) => {
                g_hat.set_col(col, &g);
                h_hat.set_col(col, &h);
                e_hat.set_col(col, &e);
            }
            None => degenerate.push(col),
        }
    }
    Ok(FactorEstimates {
        method: Method::HosvdSti,
        g_hat,
        h_hat,
        e_hat: Some(e_hat),
        degenerate_columns: degenerate,
        iterations: None,
        converged: true,
    })
}

/// Per-column rank-one HOSVD of the matched-filtered matrix `Ỹ` (`LMP x N`).
///
/// Unobservable columns (all-zero up to [`DEGENERATE_REL_TOL`]) come back as
/// zero vectors and are listed in `degenerate_columns`.
pub fn hosvd_sti(y_tilde: &ComplexMatrix, dims: [usize; 3]) -> Result<FactorEstimates> {
    check_rows(y_tilde, dims)?;
    let floor = DEGENERATE_REL_TOL * y_tilde.frobenius_norm();
    let results = (0..y_tilde.cols()).map(|c| solve_column(y_tilde, c, dims, floor)).collect();
    assemble(results, dims)
}

/// [`hosvd_sti`] with the columns fanned out on the rayon pool. Output is
/// bitwise identical to the sequential version.
pub fn hosvd_sti_parallel(y_tilde: &ComplexMatrix, dims: [usize; 3]) -> Result<FactorEstimates> {
    check_rows(y_tilde, dims)?;
    let floor = DEGENERATE_REL_TOL * y_tilde.frobenius_norm();
    let results = (0..y_tilde.cols())
        .into_par_iter()
        .map(|c| solve_column(y_tilde, c, dims, floor))
        .collect();
    assemble(results, dims)
}

/// Matched filter followed by [`hosvd_sti`].
pub fn estimate_hosvd_sti(y: &DenseTensor, s: &ActivationPattern) -> Result<FactorEstimates> {
    let y_tilde = matched_filter(y, s)?;
    let d = y.dims();
    hosvd_sti(&y_tilde, [d[0], d[1], d[3]])
}

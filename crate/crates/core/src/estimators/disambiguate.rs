use num_complex::Complex64;

use super::FactorEstimates;
use crate::error::{Error, Result};
use crate::scenario::Truth;
use crate::tensor::{dotc, ComplexMatrix};

/// Complex scalars applied to one column of each factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColumnScales {
    pub g: Complex64,
    pub h: Complex64,
    /// `None` when the method does not estimate `E`.
    pub e: Option<Complex64>,
}

impl ColumnScales {
    /// `λ_g λ_h λ_e`; equals one whenever the estimated trilinear product was
    /// already exact.
    pub fn product(&self) -> Complex64 {
        self.g * self.h * self.e.unwrap_or(Complex64::new(1.0, 0.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisambiguationReport {
    pub columns: Vec<ColumnScales>,
}

fn align(est: &ComplexMatrix, truth: &ComplexMatrix, name: &str) -> Result<(ComplexMatrix, Vec<Complex64>)> {
    if est.shape() != truth.shape() {
        return Err(Error::Dimension(format!(
            "estimated {name} is {:?}, truth is {:?}",
            est.shape(),
            truth.shape()
        )));
    }
    let mut out = est.clone();
    let mut scales = Vec::with_capacity(est.cols());
    for c in 0..est.cols() {
        let a_hat = est.col(c);
        let energy: f64 = a_hat.iter().map(Complex64::norm_sqr).sum();
        if energy == 0.0 {
            return Err(Error::DegenerateColumn {
                column: c,
                reason: format!("estimated {name} column is zero"),
            });
        }
        let lambda = dotc(a_hat, truth.col(c)) / energy;
        for z in out.col_mut(c) {
            *z *= lambda;
        }
        scales.push(lambda);
    }
    Ok((out, scales))
}

/// Removes the per-column scaling ambiguity against ground truth: every
/// column of every factor is multiplied by its least-squares optimal scalar
/// `λ = (â^H a) / (â^H â)`.
///
/// This is an evaluation device; it needs the truth.
pub fn disambiguate(est: &FactorEstimates, truth: &Truth) -> Result<(FactorEstimates, DisambiguationReport)> {
    let (g_hat, lg) = align(&est.g_hat, &truth.channels.g, "G")?;
    let (h_hat, lh) = align(&est.h_hat, &truth.channels.h, "H")?;
    let (e_hat, le) = match &est.e_hat {
        Some(e) => {
            let (m, s) = align(e, &truth.impairments.e, "E")?;
            (Some(m), Some(s))
        }
        None => (None, None),
    };
    let columns = (0..lg.len())
        .map(|c| ColumnScales { g: lg[c], h: lh[c], e: le.as_ref().map(|s| s[c]) })
        .collect();
    let aligned = FactorEstimates { g_hat, h_hat, e_hat, ..est.clone() };
    Ok((aligned, DisambiguationReport { columns }))
}

/// Truth-free scaling convention: the first entry of every `ĥ_n` (and `ê_n`)
/// is pinned to one and the removed scalars are absorbed into `ĝ_n`, leaving
/// each trilinear product unchanged. Columns with a zero reference entry are
/// left as they are.
///
/// This is exact when the first transmit-antenna channel coefficient and the
/// first-frame perturbation of every element are known to be one.
pub fn normalize_reference(est: &FactorEstimates) -> FactorEstimates {
    let mut out = est.clone();
    for c in 0..est.columns() {
        let h_ref = est.h_hat[(0, c)];
        let e_ref = est.e_hat.as_ref().map_or(Complex64::new(1.0, 0.0), |e| e[(0, c)]);
        if h_ref.norm() == 0.0 || e_ref.norm() == 0.0 {
            continue;
        }
        for z in out.h_hat.col_mut(c) {
            *z /= h_ref;
        }
        if let Some(e) = out.e_hat.as_mut() {
            for z in e.col_mut(c) {
                *z /= e_ref;
            }
        }
        for z in out.g_hat.col_mut(c) {
            *z *= h_ref * e_ref;
        }
    }
    out
}

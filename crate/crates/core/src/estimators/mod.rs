//! Channel and imperfection estimators operating on the received tensor.
//!
//! - [`estimate_hosvd_sti`]: closed-form matched filter plus per-column
//!   rank-one HOSVD.
//! - [`bals_baseline`]: bilinear alternating least squares that assumes an
//!   ideal RIS (`E` all ones).
//! - [`clairvoyant`]: per-factor least squares with every other factor known;
//!   the evaluation lower bound.
//!
//! All estimators are pure. PARAFAC factors are only defined up to per-column
//! scalars whose product is one; [`disambiguate`] aligns estimates with the
//! ground truth for scoring and [`normalize_reference`] offers a
//! truth-free convention.

mod bals;
mod clairvoyant;
mod disambiguate;
mod hosvd_sti;
mod matched_filter;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::tensor::ComplexMatrix;

pub use bals::{bals_baseline, BalsOptions};
pub use clairvoyant::clairvoyant;
pub use disambiguate::{disambiguate, normalize_reference, ColumnScales, DisambiguationReport};
pub use hosvd_sti::{estimate_hosvd_sti, hosvd_sti, hosvd_sti_parallel, rank_one_column, principal_cbrt};
pub use matched_filter::matched_filter;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    HosvdSti,
    Bals,
    Clairvoyant,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::HosvdSti, Method::Bals, Method::Clairvoyant];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::HosvdSti => "hosvd-sti",
            Method::Bals => "bals",
            Method::Clairvoyant => "clairvoyant",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown method {s:?} (expected hosvd-sti, bals or clairvoyant)")))
    }
}

/// Estimated factor matrices of one realization.
#[derive(Clone, Debug)]
pub struct FactorEstimates {
    pub method: Method,
    /// `L x N`.
    pub g_hat: ComplexMatrix,
    /// `M x N`.
    pub h_hat: ComplexMatrix,
    /// `P x N`; absent for the ideal-RIS baseline.
    pub e_hat: Option<ComplexMatrix>,
    /// Columns that carried no information and were returned as zeros.
    pub degenerate_columns: Vec<usize>,
    /// Alternations performed (baseline only).
    pub iterations: Option<usize>,
    /// False when an iterative method stopped at `max_iters`.
    pub converged: bool,
}

impl FactorEstimates {
    pub fn columns(&self) -> usize {
        self.g_hat.cols()
    }
}

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FactorEstimates, Method};
use crate::error::{Error, Result};
use crate::scenario::{gaussian_matrix, ActivationPattern};
use crate::tensor::{solve_right_transpose, ComplexMatrix, DenseTensor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalsOptions {
    pub max_iters: usize,
    /// Stop once the relative reconstruction error changes by less than this.
    pub tol: f64,
    /// Seed of the Gaussian initialization of `Ĥ`.
    pub seed: u64,
}

impl Default for BalsOptions {
    fn default() -> Self {
        Self { max_iters: 200, tol: 1e-6, seed: 0 }
    }
}

/// Bilinear ALS for an ideal RIS: `E` is frozen to ones and `G`, `H` are
/// refined alternately from the mode-0 and mode-1 unfoldings,
///
/// `Ĝ ← [Y]_(1) ((1 ⋄ S ⋄ Ĥ)^T)^†`, `Ĥ ← [Y]_(2) ((1 ⋄ S ⋄ Ĝ)^T)^†`.
///
/// Hitting `max_iters` is not an error: the best iterate is returned with
/// `converged = false`.
pub fn bals_baseline(y: &DenseTensor, s: &ActivationPattern, opts: &BalsOptions) -> Result<FactorEstimates> {
    if y.order() != 4 {
        return Err(Error::Dimension(format!("received tensor must be order 4, got {}", y.order())));
    }
    let [l, m, k, p] = [y.dims()[0], y.dims()[1], y.dims()[2], y.dims()[3]];
    let n = s.elements();
    if s.blocks() != k {
        return Err(Error::Dimension(format!("pattern has {} blocks, tensor has {k}", s.blocks())));
    }
    if k < n {
        return Err(Error::identifiability(k, n));
    }
    if opts.max_iters == 0 {
        return Err(Error::Argument("max_iters must be at least 1".into()));
    }

    let y1 = y.unfold(0)?;
    let y2 = y.unfold(1)?;
    let y_norm = y.frobenius_norm().max(f64::MIN_POSITIVE);
    let ones = ComplexMatrix::from_fn(p, n, |_, _| Complex64::new(1.0, 0.0));
    let ones_s = ones.khatri_rao(&s.s)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut h_hat = gaussian_matrix(m, n, &mut rng);
    let mut g_hat = ComplexMatrix::zeros(l, n);
    let mut best: Option<(f64, ComplexMatrix, ComplexMatrix)> = None;
    let mut prev_err = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=opts.max_iters {
        iterations = iter;
        g_hat = solve_right_transpose(&y1, &ones_s.khatri_rao(&h_hat)?)?.solution;
        let z2 = ones_s.khatri_rao(&g_hat)?;
        h_hat = solve_right_transpose(&y2, &z2)?.solution;
        let err = y2.sub(&h_hat.matmul(&z2.transpose())?)?.frobenius_norm() / y_norm;
        if best.as_ref().is_none_or(|(b, _, _)| err < *b) {
            best = Some((err, g_hat.clone(), h_hat.clone()));
        }
        if (prev_err - err).abs() < opts.tol {
            converged = true;
            break;
        }
        prev_err = err;
    }
    if let Some((_, g, h)) = best {
        g_hat = g;
        h_hat = h;
    }
    Ok(FactorEstimates {
        method: Method::Bals,
        g_hat,
        h_hat,
        e_hat: None,
        degenerate_columns: Vec::new(),
        iterations: Some(iterations),
        converged,
    })
}

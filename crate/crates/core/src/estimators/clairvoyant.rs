use super::{FactorEstimates, Method};
use crate::error::{Error, Result};
use crate::scenario::{ActivationPattern, Truth};
use crate::tensor::{solve_right_transpose, DenseTensor};

/// Lower-bound estimator: each factor is one least-squares solve from its
/// unfolding with every other factor fixed to the truth,
///
/// `Ĝ = [Y]_(1) ((E ⋄ S ⋄ H)^T)^†`, `Ĥ = [Y]_(2) ((E ⋄ S ⋄ G)^T)^†`,
/// `Ê = [Y]_(4) ((S ⋄ H ⋄ G)^T)^†`.
pub fn clairvoyant(y: &DenseTensor, truth: &Truth, s: &ActivationPattern) -> Result<FactorEstimates> {
    let (g, h, e) = (&truth.channels.g, &truth.channels.h, &truth.impairments.e);
    let expected = [g.rows(), h.rows(), s.blocks(), e.rows()];
    if y.dims() != expected {
        return Err(Error::Dimension(format!(
            "received tensor {:?} does not match truth {:?}",
            y.dims(),
            expected
        )));
    }
    let n = g.cols();
    if h.cols() != n || e.cols() != n || s.elements() != n {
        return Err(Error::Dimension("truth factors disagree on N".into()));
    }

    let g_ls = solve_right_transpose(&y.unfold(0)?, &e.khatri_rao(&s.s)?.khatri_rao(h)?)?;
    let h_ls = solve_right_transpose(&y.unfold(1)?, &e.khatri_rao(&s.s)?.khatri_rao(g)?)?;
    let e_ls = solve_right_transpose(&y.unfold(3)?, &s.s.khatri_rao(h)?.khatri_rao(g)?)?;

    let mut degenerate: Vec<usize> =
        g_ls.deficient.iter().chain(&h_ls.deficient).chain(&e_ls.deficient).copied().collect();
    degenerate.sort_unstable();
    degenerate.dedup();

    Ok(FactorEstimates {
        method: Method::Clairvoyant,
        g_hat: g_ls.solution,
        h_hat: h_ls.solution,
        e_hat: Some(e_ls.solution),
        degenerate_columns: degenerate,
        iterations: None,
        converged: true,
    })
}

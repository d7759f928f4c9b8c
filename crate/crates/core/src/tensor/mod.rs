//! Dense complex multilinear algebra.
//!
//! Everything is linearized first-index-fastest, so `vec(c ∘ b ∘ a)` equals
//! `a ⊗ b ⊗ c` and the mode-0 unfolding of a CP tensor with factors
//! `(A1, A2, A3, A4)` is `A1 (A4 ⋄ A3 ⋄ A2)^T` with no permutations.

mod dense;
mod lstsq;
mod matrix;
mod svd;

pub use dense::{DenseTensor, MAX_ORDER, MIN_ORDER};
pub use lstsq::{lstsq, solve_right_transpose, LeastSquares, RANK_TOL};
pub use matrix::{dotc, kron, kron_vec, norm2, ComplexMatrix};
pub use svd::{dominant_svd, hosvd3, left_singular_basis, svd, Hosvd3, Svd, SvdTriple};

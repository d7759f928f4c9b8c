//! Joint channel and RIS-imperfection estimation for RIS-assisted MIMO links.
//!
//! The received pilot signal over `P` frames of `K` blocks forms a fourth-order
//! PARAFAC tensor `L x M x K x P` with factors `G` (RIS-Rx), `H` (Tx-RIS), the
//! known activation pattern `S` and the per-frame imperfection matrix `E`.
//! [`estimators::estimate_hosvd_sti`] strips `S` by matched filtering and then
//! recovers every column triple `(g_n, h_n, e_n)` in closed form from a
//! rank-one HOSVD truncation.
//!
//! Modules:
//!
//! - [`tensor`]: dense complex matrices and tensors, Khatri-Rao, unfoldings,
//!   mode products, Jacobi SVD and HOSVD.
//! - [`scenario`]: seeded synthetic realizations (channels, DFT pattern,
//!   impairments, noisy received tensor).
//! - [`estimators`]: HOSVD-STI, the ideal-RIS bilinear ALS baseline, the
//!   clairvoyant bound and scale disambiguation.
//! - [`harness`]: Monte Carlo plan execution, NMSE and aggregation.
//! - [`cli`]: plan files, result emission and the `ris-chanest` front end.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod scenario;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64;

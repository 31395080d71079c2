//! Dense and iterative linear algebra.

mod eig;
mod lanczos;
mod matrix;
mod operator;
mod power;
mod svd;

pub use eig::{normalize_sign, sym_eig_dense, SymEigResult};
pub use lanczos::{lanczos_smallest, lanczos_smallest_with, LanczosOptions};
pub use matrix::{axpy, dot, norm2, DenseMatrix};
pub use operator::{assemble, LinearOperator};
pub use power::power_iteration_max;
pub use svd::{thin_svd, ThinSvdResult, RANK_TOL};

/// Eigenvalues below this are treated as exact zeros.
pub const ZERO_EIGENVALUE: f64 = 1e-8;

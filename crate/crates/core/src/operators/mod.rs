//! Discrete Laplace–Beltrami machinery: cotangent stiffness `K` (`∫ ∇_T u · ∇_T v`), lumped mass
//! `M` (`∫ u v`), per-face tangential gradients, the zero-mean space and the Poincaré constant.

mod assemble;
mod eigen;
mod sparse;

pub use assemble::{
    assemble_mass, assemble_stiffness, face_gradient, hat_gradients, mass_integral,
    project_zero_mean, project_zero_mean_in_place, tangential_gradient, DiscreteOperators,
};
pub use eigen::{first_nonzero_eigenvalue, lowest_eigenpairs, EigenOptions, EigenPairs};
pub use sparse::{conjugate_gradient, dot, norm, CgOutcome, CsrMatrix};

#[derive(Debug, thiserror::Error)]
pub enum OperatorError {
    #[error("non-finite cotangent weight in triangle {0}")]
    NonFiniteCotangent(usize),
    #[error("linear solve failed after {iterations} iterations (residual {residual:e})")]
    SolverFailed { iterations: usize, residual: f64 },
    #[error("eigen-iteration did not converge in {iterations} iterations (residual {residual:e})")]
    EigenNotConverged { iterations: usize, residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

//! Time integration of `u_tt − Δ u + a(x) g(u_t) = 0` on the zero-mean space.
//!
//! The semi-discrete system `u̇ = v`, `M v̇ = −K u − M (a ⊙ g(v))` is advanced by the implicit
//! midpoint rule. The rule conserves `E = ½(vᵀMv + uᵀKu)` exactly when `a ≡ 0` and satisfies
//! the discrete balance `E₁ − E₀ = −dt Σ M a g(v_mid) v_mid` for every `g`.

mod feedback;
mod integrator;
mod multiplier;
mod trajectory;

pub use feedback::{make_feedback, FeedbackKind, FeedbackLaw};
pub use integrator::{Integrator, StepInfo};
pub use multiplier::{multiplier_residual, MultiplierReport};
pub use trajectory::{
    dissipation_residual, initial_state, simulate, DissipationResidual, InitialData, Sample,
    SimulationParams, Trajectory,
};

use crate::operators::{mass_integral, norm, project_zero_mean_in_place, DiscreteOperators};

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error("invalid feedback law: {0}")]
    InvalidFeedback(String),
    #[error("Newton iteration did not converge at t = {t} (residual {residual:e}); dt too large for the nonlinearity")]
    NewtonFailed { t: f64, residual: f64 },
    #[error("inner linear solve failed ({iterations} iterations, residual {residual:e})")]
    LinearSolve { iterations: usize, residual: f64 },
    #[error("state snapshots were not recorded")]
    MissingSnapshots,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Operator(#[from] crate::operators::OperatorError),
}

/// Displacement and velocity at time `t`; `u` is kept mass-orthogonal to constants.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub energy: f64,
}

impl WaveState {
    /// Projects `u` and `v` to zero mean and caches the energy.
    pub fn new(ops: &DiscreteOperators, mut u: Vec<f64>, mut v: Vec<f64>) -> Result<Self, DynamicsError> {
        for x in [&u, &v] {
            if x.len() != ops.dim() {
                return Err(DynamicsError::Dimension {
                    expected: ops.dim(),
                    got: x.len(),
                });
            }
        }
        project_zero_mean_in_place(&mut u, &ops.mass);
        project_zero_mean_in_place(&mut v, &ops.mass);
        let energy = ops.energy(&u, &v);
        Ok(Self { t: 0.0, u, v, energy })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            t: 0.0,
            u: vec![0.0; n],
            v: vec![0.0; n],
            energy: 0.0,
        }
    }

    pub fn kinetic(&self, ops: &DiscreteOperators) -> f64 {
        0.5 * ops.kinetic2(&self.v)
    }

    pub fn potential(&self, ops: &DiscreteOperators) -> f64 {
        0.5 * ops.stiffness.quadratic_form(&self.u)
    }

    /// `|Σ M u| / ‖u‖` (0 for `u = 0`).
    pub fn mean_defect(&self, ops: &DiscreteOperators) -> f64 {
        let n = norm(&self.u);
        if n == 0.0 {
            0.0
        } else {
            mass_integral(&self.u, &ops.mass).abs() / n
        }
    }
}

//! Nonlinear decay-rate calculus: the majorant `h`, the chain `r → p → q`, the comparison ODE
//! `S' + q(S) = 0`, closed-form envelopes and the discrete comparison certificate.

mod certify;
mod chain;
mod envelope;
mod monotone;

pub use certify::{
    certify_samples, fit_l, discrete_comparison, sequence_condition, Certification, CertificationReport, ENVELOPE_DT,
};
pub use chain::{build_chain, chain_from_parts, concave_majorant, construct_h, verify_h, DecayChain};
pub use envelope::{closed_form_envelope, solve_envelope, ClosedForm, EnvelopeCurve};
pub use monotone::{invert_increasing, MonotoneFn};

use crate::dynamics::{FeedbackKind, FeedbackLaw, Trajectory};
use crate::format::num;
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error)]
pub enum DecayError {
    #[error("function is not strictly increasing: {0}")]
    NotMonotone(String),
    #[error("majorant verification failed: {0}")]
    MajorantFailed(String),
    #[error("could not bracket the inverse at {0:e} (function bounded?)")]
    Bracket(f64),
    #[error("trajectory covers only {periods} periods of T0; need at least 3")]
    TooShort { periods: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A chain together with its comparison solution in units of `T0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayEnvelope {
    pub chain: DecayChain,
    pub t0: f64,
    /// `S(τ)` for `τ = t/T0 − 1`.
    pub curve: EnvelopeCurve,
    /// Rate family of the feedback law: exact for linear chains, the polynomial form otherwise.
    pub closed_form: ClosedForm,
}

impl DecayEnvelope {
    pub fn new(chain: DecayChain, g: &FeedbackLaw, t0: f64, s0: f64, tau_max: f64) -> Result<Self, DecayError> {
        let curve = solve_envelope(&chain.q, s0, tau_max, ENVELOPE_DT)?;
        let closed_form = match (chain.linear_gamma(), g.kind) {
            (Some(gamma), _) => {
                let k = gamma / (1.0 + gamma);
                // S(t/T0 − 1) = e^{k} e^{−k t / T0} S0
                ClosedForm::Exponential { c: k.exp(), k: k / t0 }
            }
            (None, FeedbackKind::Power { exponent } | FeedbackKind::SaturatedPower { exponent, .. }) => {
                ClosedForm::Polynomial { c: 1.0, p: exponent }
            }
            (None, FeedbackKind::Linear { .. }) => unreachable!("linear laws give linear chains"),
        };
        Ok(Self {
            chain,
            t0,
            curve,
            closed_form,
        })
    }

    /// `S(t/T0 − 1)`, equal to `S(0)` for `t ≤ T0`.
    pub fn bound(&self, t: f64) -> f64 {
        self.curve.at((t / self.t0 - 1.0).max(0.0))
    }
}

/// `t,S` joined with the trajectory columns on `t`.
pub fn envelope_csv(traj: &Trajectory, bound: impl Fn(f64) -> f64) -> String {
    let mut out = String::from("t,S,E,kinetic,potential,dissipated_increment,dissipation_residual\n");
    for (row, sample) in traj.to_csv().lines().skip(1).zip(&traj.samples) {
        let rest = row.split_once(',').map_or("", |(_, r)| r);
        let _ = writeln!(out, "{},{},{rest}", num(sample.t), num(bound(sample.t)));
    }
    out
}

/// Certifies a trajectory with the chain built from its feedback law.
pub fn certify(
    traj: &Trajectory,
    chain: &DecayChain,
    t0: f64,
) -> Result<Certification, DecayError> {
    certify_samples(&traj.times(), &traj.energies(), chain, t0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::make_feedback;

    #[test]
    fn linear_chain_matches_analytic_exponential() {
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        let chain = build_chain(construct_h(&g).unwrap(), 10.0, 2.0, g.k0(), 0.8).unwrap();
        let gamma = chain.linear_gamma().unwrap();
        let env = DecayEnvelope::new(chain, &g, 1.5, 3.0, 12.0).unwrap();
        for (t, s) in env.curve.t.iter().zip(&env.curve.s) {
            let exact = 3.0 * (-gamma * t / (1.0 + gamma)).exp();
            assert!((s - exact).abs() <= 1e-6 * exact);
        }
        let ClosedForm::Exponential { .. } = env.closed_form else {
            panic!("expected exponential form")
        };
        for t in [1.5, 4.0, 10.0] {
            let cf = env.closed_form.eval(t, 3.0);
            assert!((cf - env.bound(t)).abs() <= 1e-6 * cf);
        }
    }
}

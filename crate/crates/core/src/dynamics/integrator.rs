use super::{DynamicsError, FeedbackLaw, WaveState};
use crate::operators::{conjugate_gradient, norm, project_zero_mean_in_place, CsrMatrix, DiscreteOperators};

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-12;
const MAX_HALVINGS: u32 = 4;

/// Per-step bookkeeping of the dissipated energy.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInfo {
    /// `dt Σ M a ½(g(v₀) + g(v₁)) v_mid`, the quadrature recorded in trajectories.
    pub dissipated: f64,
    /// `dt Σ M a g(v_mid) v_mid`, which the scheme balances exactly.
    pub dissipated_exact: f64,
    pub newton_iterations: usize,
    /// Number of dt-halvings needed after a Newton failure.
    pub halvings: u32,
}

/// Implicit-midpoint stepper for a fixed mesh, damping and feedback law.
///
/// The midpoint velocity `w` solves `((2/dt) M + (dt/2) K) w + M a g(w) = (2/dt) M v₀ − K u₀`
/// by damped Newton with the diagonal Jacobian correction `M a g'(w)`.
pub struct Integrator<'a> {
    ops: &'a DiscreteOperators,
    ma: Vec<f64>,
    g: FeedbackLaw,
    dt: f64,
    base: CsrMatrix,
}

impl<'a> Integrator<'a> {
    pub fn new(
        ops: &'a DiscreteOperators,
        a: &[f64],
        g: FeedbackLaw,
        dt: f64,
    ) -> Result<Self, DynamicsError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(DynamicsError::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if a.len() != ops.dim() {
            return Err(DynamicsError::Dimension {
                expected: ops.dim(),
                got: a.len(),
            });
        }
        if a.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(DynamicsError::InvalidParameter("damping must be finite and ≥ 0".into()));
        }
        let ma = a.iter().zip(&ops.mass).map(|(a, m)| a * m).collect();
        Ok(Self {
            ops,
            ma,
            g,
            dt,
            base: Self::base_matrix(ops, dt),
        })
    }

    fn base_matrix(ops: &DiscreteOperators, dt: f64) -> CsrMatrix {
        let d: Vec<f64> = ops.mass.iter().map(|m| 2.0 / dt * m).collect();
        ops.stiffness.scaled_plus_diagonal(0.5 * dt, &d)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One step of size `dt`; on Newton failure the step is retried as two half steps
    /// (recursively, up to four halvings).
    pub fn step(&self, state: &WaveState) -> Result<(WaveState, StepInfo), DynamicsError> {
        self.step_with(state, self.dt, &self.base, 0)
    }

    fn step_with(
        &self,
        state: &WaveState,
        dt: f64,
        base: &CsrMatrix,
        depth: u32,
    ) -> Result<(WaveState, StepInfo), DynamicsError> {
        match self.midpoint(state, dt, base) {
            Ok(out) => Ok(out),
            Err(DynamicsError::NewtonFailed { .. }) if depth < MAX_HALVINGS => {
                let half = Self::base_matrix(self.ops, 0.5 * dt);
                let (mid, i1) = self.step_with(state, 0.5 * dt, &half, depth + 1)?;
                let (end, i2) = self.step_with(&mid, 0.5 * dt, &half, depth + 1)?;
                Ok((
                    end,
                    StepInfo {
                        dissipated: i1.dissipated + i2.dissipated,
                        dissipated_exact: i1.dissipated_exact + i2.dissipated_exact,
                        newton_iterations: i1.newton_iterations + i2.newton_iterations,
                        halvings: 1 + i1.halvings.max(i2.halvings),
                    },
                ))
            }
            Err(e) => Err(e),
        }
    }

    fn residual(&self, base: &CsrMatrix, w: &[f64], rhs: &[f64], out: &mut [f64]) {
        base.mul_vec_into(w, out);
        for i in 0..w.len() {
            out[i] += self.ma[i] * self.g.eval(w[i]) - rhs[i];
        }
    }

    fn midpoint(
        &self,
        state: &WaveState,
        dt: f64,
        base: &CsrMatrix,
    ) -> Result<(WaveState, StepInfo), DynamicsError> {
        let ops = self.ops;
        let n = ops.dim();
        let ku = ops.stiffness.mul_vec(&state.u);
        let rhs: Vec<f64> = (0..n)
            .map(|i| 2.0 / dt * ops.mass[i] * state.v[i] - ku[i])
            .collect();
        let tol = NEWTON_TOL * norm(&rhs);

        let mut w = state.v.clone();
        let mut f = vec![0.0; n];
        self.residual(base, &w, &rhs, &mut f);
        let mut fnorm = norm(&f);
        let mut iterations = 0;
        let mut trial = vec![0.0; n];
        let mut f_trial = vec![0.0; n];
        while fnorm > tol {
            if iterations == NEWTON_MAX_ITER {
                return Err(DynamicsError::NewtonFailed {
                    t: state.t,
                    residual: fnorm,
                });
            }
            iterations += 1;
            let jd: Vec<f64> = (0..n).map(|i| self.ma[i] * self.g.derivative(w[i])).collect();
            let jac = base.scaled_plus_diagonal(1.0, &jd);
            let neg_f: Vec<f64> = f.iter().map(|x| -x).collect();
            let mut delta = vec![0.0; n];
            let rel = (0.1 * tol / fnorm).clamp(1e-15, 1e-2);
            let cg = conjugate_gradient(&jac, &neg_f, &mut delta, rel, 10 * n + 100);
            if !cg.converged && cg.residual > 0.5 * fnorm {
                return Err(DynamicsError::LinearSolve {
                    iterations: cg.iterations,
                    residual: cg.residual,
                });
            }
            // backtracking on the residual norm
            let mut lambda = 1.0;
            loop {
                for i in 0..n {
                    trial[i] = w[i] + lambda * delta[i];
                }
                self.residual(base, &trial, &rhs, &mut f_trial);
                let tn = norm(&f_trial);
                if tn < fnorm || lambda < 1e-6 {
                    std::mem::swap(&mut w, &mut trial);
                    std::mem::swap(&mut f, &mut f_trial);
                    fnorm = tn;
                    break;
                }
                lambda *= 0.5;
            }
            if !fnorm.is_finite() {
                return Err(DynamicsError::NewtonFailed {
                    t: state.t,
                    residual: fnorm,
                });
            }
        }

        let mut u: Vec<f64> = (0..n).map(|i| state.u[i] + dt * w[i]).collect();
        let v: Vec<f64> = (0..n).map(|i| 2.0 * w[i] - state.v[i]).collect();
        project_zero_mean_in_place(&mut u, &ops.mass);
        let mut dissipated = 0.0;
        let mut dissipated_exact = 0.0;
        for i in 0..n {
            if self.ma[i] != 0.0 {
                let g_avg = 0.5 * (self.g.eval(state.v[i]) + self.g.eval(v[i]));
                dissipated += self.ma[i] * g_avg * w[i];
                dissipated_exact += self.ma[i] * self.g.eval(w[i]) * w[i];
            }
        }
        let energy = ops.energy(&u, &v);
        Ok((
            WaveState {
                t: state.t + dt,
                u,
                v,
                energy,
            },
            StepInfo {
                dissipated: dt * dissipated,
                dissipated_exact: dt * dissipated_exact,
                newton_iterations: iterations,
                halvings: 0,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{make_feedback, FeedbackKind};
    use crate::mesh::generate_icosphere;
    use crate::operators::lowest_eigenpairs;
    use crate::Vec3;

    fn setup(subdiv: u32) -> (crate::SurfaceMesh, DiscreteOperators) {
        let m = generate_icosphere(Vec3::zeros(), 1.0, subdiv).unwrap();
        let ops = DiscreteOperators::assemble(&m).unwrap();
        (m, ops)
    }

    fn smooth_state(m: &crate::SurfaceMesh, ops: &DiscreteOperators, amp: f64) -> WaveState {
        let u = m.vertices().iter().map(|x| amp * (x.x * x.y + 0.3 * x.z)).collect();
        let v = m.vertices().iter().map(|x| amp * (0.5 * x.y - x.z * x.z)).collect();
        WaveState::new(ops, u, v).unwrap()
    }

    #[test]
    fn zero_state_is_equilibrium() {
        let (m, ops) = setup(2);
        let a = vec![1.0; m.num_vertices()];
        let g = make_feedback(FeedbackKind::Power { exponent: 3.0 }).unwrap();
        let it = Integrator::new(&ops, &a, g, 0.05).unwrap();
        let mut s = WaveState::zero(m.num_vertices());
        for _ in 0..10 {
            s = it.step(&s).unwrap().0;
        }
        assert!(s.u.iter().chain(&s.v).all(|&x| x == 0.0));
    }

    #[test]
    fn undamped_conserves_energy() {
        let (m, ops) = setup(2);
        let a = vec![0.0; m.num_vertices()];
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        let it = Integrator::new(&ops, &a, g, 0.5 * m.min_edge_length()).unwrap();
        let mut s = smooth_state(&m, &ops, 1.0);
        let e0 = s.energy;
        for _ in 0..1000 {
            s = it.step(&s).unwrap().0;
        }
        assert!((s.energy - e0).abs() / e0 <= 1e-9, "{}", (s.energy - e0).abs() / e0);
    }

    #[test]
    fn linear_balance_is_exact() {
        let (m, ops) = setup(3);
        let a: Vec<f64> = m.vertices().iter().map(|x| 0.5 + 0.5 * x.z.max(0.0)).collect();
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        let dt = 0.5 * m.min_edge_length();
        let it = Integrator::new(&ops, &a, g, dt).unwrap();
        let s0 = smooth_state(&m, &ops, 1.0);
        let (s1, info) = it.step(&s0).unwrap();
        // independent evaluation of −dt Σ M a w² with w = (v₀ + v₁)/2
        let direct: f64 = (0..m.num_vertices())
            .map(|i| {
                let w = 0.5 * (s0.v[i] + s1.v[i]);
                dt * ops.mass[i] * a[i] * w * w
            })
            .sum();
        let de = s1.energy - s0.energy;
        assert!((de + direct).abs() <= 1e-10 * direct, "{de} {direct}");
        assert!((info.dissipated - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn nonlinear_exact_balance() {
        let (m, ops) = setup(2);
        let a = vec![2.0; m.num_vertices()];
        let g = make_feedback(FeedbackKind::Power { exponent: 3.0 }).unwrap();
        let it = Integrator::new(&ops, &a, g, 0.05).unwrap();
        let mut s = smooth_state(&m, &ops, 0.8);
        for _ in 0..20 {
            let (next, info) = it.step(&s).unwrap();
            let de = next.energy - s.energy;
            assert!((de + info.dissipated_exact).abs() <= 1e-10 * s.energy);
            assert!(info.dissipated >= 0.0);
            s = next;
        }
    }

    #[test]
    fn time_reversal_undamped() {
        let (m, ops) = setup(2);
        let a = vec![0.0; m.num_vertices()];
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        let it = Integrator::new(&ops, &a, g, 0.03).unwrap();
        let s0 = smooth_state(&m, &ops, 1.0);
        let mut s = s0.clone();
        for _ in 0..200 {
            s = it.step(&s).unwrap().0;
        }
        s.v.iter_mut().for_each(|x| *x = -*x);
        for _ in 0..200 {
            s = it.step(&s).unwrap().0;
        }
        let du: f64 = s.u.iter().zip(&s0.u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let dv: f64 = s.v.iter().zip(&s0.v).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
        assert!(du <= 1e-8 * norm(&s0.u), "{du}");
        assert!(dv <= 1e-8 * norm(&s0.v), "{dv}");
    }

    #[test]
    fn zero_mean_preserved_under_local_nonlinear_damping() {
        let (m, ops) = setup(3);
        let a: Vec<f64> = m.vertices().iter().map(|x| if x.z > 0.2 { 3.0 } else { 0.0 }).collect();
        let g = make_feedback(FeedbackKind::Power { exponent: 3.0 }).unwrap();
        let it = Integrator::new(&ops, &a, g, 0.05).unwrap();
        let mut s = smooth_state(&m, &ops, 0.9);
        for _ in 0..50 {
            s = it.step(&s).unwrap().0;
            assert!(s.mean_defect(&ops) <= 1e-10);
        }
    }

    #[test]
    fn eigenmode_oscillates_at_expected_frequency() {
        let (_m, ops) = setup(3);
        let pairs = lowest_eigenpairs(&ops.stiffness, &ops.mass, 1, Default::default()).unwrap();
        let (lam, phi) = (pairs.values[0], pairs.vectors[0].clone());
        let a = vec![0.0; ops.dim()];
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        let dt = 0.01;
        let it = Integrator::new(&ops, &a, g, dt).unwrap();
        let mut s = WaveState::new(&ops, phi.clone(), vec![0.0; ops.dim()]).unwrap();
        let steps = 100;
        for _ in 0..steps {
            s = it.step(&s).unwrap().0;
        }
        // midpoint rule: cos(θ n) with tan(θ/2) = ω dt / 2
        let theta = 2.0 * (lam.sqrt() * dt / 2.0).atan();
        let coeff: f64 = s.u.iter().zip(&phi).zip(&ops.mass).map(|((a, b), m)| a * b * m).sum();
        assert!((coeff - (theta * steps as f64).cos()).abs() < 1e-9, "{coeff}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let (_m, ops) = setup(1);
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        assert!(Integrator::new(&ops, &vec![0.0; ops.dim()], g, 0.0).is_err());
        assert!(Integrator::new(&ops, &vec![-1.0; ops.dim()], g, 0.1).is_err());
        assert!(Integrator::new(&ops, &[0.0], g, 0.1).is_err());
    }
}

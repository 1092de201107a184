use super::{DynamicsError, FeedbackLaw, Integrator, WaveState};
use crate::format::num;
use crate::operators::{lowest_eigenpairs, DiscreteOperators, EigenOptions};
use crate::SurfaceMesh;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// How the initial `(u₀, v₀)` is produced. Everything is projected to zero mean.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    Explicit { u: Vec<f64>, v: Vec<f64> },
    /// `u₀ = amplitude · φ_index` (mass-normalised, `index = 1` is the `λ₁` mode), `v₀ = 0`.
    Mode { index: usize, amplitude: f64 },
    /// Random combination of the coordinate monomials of degree ≤ 2 in both `u₀` and `v₀`.
    Random { seed: u64, amplitude: f64 },
}

pub fn initial_state(
    mesh: &SurfaceMesh,
    ops: &DiscreteOperators,
    data: &InitialData,
) -> Result<WaveState, DynamicsError> {
    match data {
        InitialData::Explicit { u, v } => WaveState::new(ops, u.clone(), v.clone()),
        InitialData::Mode { index, amplitude } => {
            if *index == 0 {
                return Err(DynamicsError::InvalidParameter("mode index starts at 1".into()));
            }
            let pairs = lowest_eigenpairs(&ops.stiffness, &ops.mass, *index, EigenOptions::default())?;
            let u = pairs.vectors[index - 1].iter().map(|x| amplitude * x).collect();
            WaveState::new(ops, u, vec![0.0; ops.dim()])
        }
        InitialData::Random { seed, amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let centroid = mesh.vertices().iter().sum::<crate::Vec3>() / mesh.num_vertices() as f64;
            let scale = mesh
                .vertices()
                .iter()
                .fold(0.0f64, |m, x| m.max((x - centroid).norm()));
            let field = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                let c: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
                mesh.vertices()
                    .iter()
                    .map(|x| {
                        let p = (x - centroid) / scale;
                        let mono = [
                            p.x,
                            p.y,
                            p.z,
                            p.x * p.y,
                            p.y * p.z,
                            p.z * p.x,
                            p.x * p.x,
                            p.y * p.y,
                            p.z * p.z,
                        ];
                        amplitude * c.iter().zip(mono).map(|(a, b)| a * b).sum::<f64>()
                    })
                    .collect()
            };
            let u = field(&mut rng);
            let v = field(&mut rng);
            WaveState::new(ops, u, v)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationParams {
    pub dt: f64,
    pub t_max: f64,
    pub sample_stride: usize,
    /// Keep `(u, v)` at every sample (needed by the multiplier diagnostic).
    pub record_snapshots: bool,
}

impl SimulationParams {
    pub fn num_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub potential: f64,
    /// Recorded dissipation since the previous sample (0 for the first sample).
    pub dissipated_increment: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub snapshots: Option<Vec<(Vec<f64>, Vec<f64>)>>,
    pub final_state: WaveState,
    pub params: SimulationParams,
    pub feedback: FeedbackLaw,
    /// `‖a‖_∞` of the damping used.
    pub a_inf: f64,
    /// Largest number of dt-halvings any step needed.
    pub max_halvings: u32,
}

impl Trajectory {
    pub fn initial_energy(&self) -> f64 {
        self.samples[0].energy
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.energy).collect()
    }

    /// Largest `E(t_{i+1}) − E(t_i)` (≤ 0 for a dissipative run up to round-off).
    pub fn max_energy_increase(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `t,E,kinetic,potential,dissipated_increment,dissipation_residual`.
    pub fn to_csv(&self) -> String {
        let res = dissipation_residual(self);
        let mut s = String::from("t,E,kinetic,potential,dissipated_increment,dissipation_residual\n");
        for (i, p) in self.samples.iter().enumerate() {
            let r = if i == 0 { 0.0 } else { res.raw[i - 1] };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                num(p.t),
                num(p.energy),
                num(p.kinetic),
                num(p.potential),
                num(p.dissipated_increment),
                num(r)
            );
        }
        s
    }

    /// Long-format state dump `sample,t,vertex_id,u,v`.
    pub fn snapshots_csv(&self) -> Result<String, DynamicsError> {
        let snaps = self.snapshots.as_ref().ok_or(DynamicsError::MissingSnapshots)?;
        let mut s = String::from("sample,t,vertex_id,u,v\n");
        for (i, ((u, v), p)) in snaps.iter().zip(&self.samples).enumerate() {
            for k in 0..u.len() {
                let _ = writeln!(s, "{i},{},{k},{},{}", num(p.t), num(u[k]), num(v[k]));
            }
        }
        Ok(s)
    }
}

/// Integrates from `initial` up to `t_max`, sampling every `sample_stride` steps (and at the end).
pub fn simulate(
    ops: &DiscreteOperators,
    a: &[f64],
    g: FeedbackLaw,
    initial: WaveState,
    params: SimulationParams,
) -> Result<Trajectory, DynamicsError> {
    if params.sample_stride == 0 {
        return Err(DynamicsError::InvalidParameter("sample_stride must be ≥ 1".into()));
    }
    if !(params.t_max > 0.0) || !params.t_max.is_finite() {
        return Err(DynamicsError::InvalidParameter(format!("t_max must be > 0, got {}", params.t_max)));
    }
    let integrator = Integrator::new(ops, a, g, params.dt)?;
    let steps = params.num_steps();
    let sample = |s: &WaveState, d: f64| Sample {
        t: s.t,
        energy: s.energy,
        kinetic: s.kinetic(ops),
        potential: s.potential(ops),
        dissipated_increment: d,
    };
    let mut samples = vec![sample(&initial, 0.0)];
    let mut snapshots = params
        .record_snapshots
        .then(|| vec![(initial.u.clone(), initial.v.clone())]);
    let mut state = initial;
    let mut pending = 0.0;
    let mut max_halvings = 0;
    for k in 1..=steps {
        let (next, info) = integrator.step(&state)?;
        // time from the step count, so sample times do not accumulate round-off
        state = WaveState {
            t: k as f64 * params.dt,
            ..next
        };
        pending += info.dissipated;
        max_halvings = max_halvings.max(info.halvings);
        if k % params.sample_stride == 0 || k == steps {
            samples.push(sample(&state, pending));
            if let Some(snaps) = snapshots.as_mut() {
                snaps.push((state.u.clone(), state.v.clone()));
            }
            pending = 0.0;
        }
    }
    Ok(Trajectory {
        samples,
        snapshots,
        final_state: state,
        params,
        feedback: g,
        a_inf: a.iter().fold(0.0, |m: f64, x| m.max(*x)),
        max_halvings,
    })
}

/// Per-interval defect of the energy ledger `E(t_{i+1}) − E(t_i) + D_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DissipationResidual {
    pub raw: Vec<f64>,
    /// `raw / E(0)` (equal to `raw` when `E(0) = 0`).
    pub relative: Vec<f64>,
}

impl DissipationResidual {
    pub fn max_raw(&self) -> f64 {
        self.raw.iter().fold(0.0, |m: f64, x| m.max(*x))
    }

    pub fn max_relative(&self) -> f64 {
        self.relative.iter().fold(0.0, |m: f64, x| m.max(*x))
    }
}

pub fn dissipation_residual(traj: &Trajectory) -> DissipationResidual {
    let e0 = traj.initial_energy();
    let raw: Vec<f64> = traj
        .samples
        .windows(2)
        .map(|w| (w[1].energy - w[0].energy + w[1].dissipated_increment).abs())
        .collect();
    let relative = raw
        .iter()
        .map(|r| if e0 > 0.0 { r / e0 } else { *r })
        .collect();
    DissipationResidual { raw, relative }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{make_feedback, FeedbackKind};
    use crate::mesh::generate_icosphere;
    use crate::Vec3;

    fn setup(subdiv: u32) -> (SurfaceMesh, DiscreteOperators) {
        let m = generate_icosphere(Vec3::zeros(), 1.0, subdiv).unwrap();
        let ops = DiscreteOperators::assemble(&m).unwrap();
        (m, ops)
    }

    fn params(dt: f64, t_max: f64, stride: usize) -> SimulationParams {
        SimulationParams {
            dt,
            t_max,
            sample_stride: stride,
            record_snapshots: false,
        }
    }

    #[test]
    fn zero_initial_data_keeps_zero_energy() {
        let (m, ops) = setup(2);
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        let s0 = WaveState::zero(m.num_vertices());
        let tr = simulate(&ops, &vec![1.0; ops.dim()], g, s0, params(0.05, 1.0, 2)).unwrap();
        assert!(tr.samples.iter().all(|s| s.energy == 0.0));
        assert_eq!(tr.samples.len(), 11);
    }

    #[test]
    fn undamped_exchange_between_kinetic_and_potential() {
        let (m, ops) = setup(2);
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        let s0 = initial_state(&m, &ops, &InitialData::Mode { index: 1, amplitude: 1.0 }).unwrap();
        let tr = simulate(&ops, &vec![0.0; ops.dim()], g, s0, params(0.02, 4.0, 5)).unwrap();
        let e0 = tr.initial_energy();
        let kin_max = tr.samples.iter().fold(0.0f64, |m, s| m.max(s.kinetic));
        assert!(kin_max > 0.5 * e0);
        for s in &tr.samples {
            assert!((s.energy - e0).abs() <= 1e-9 * e0);
            assert!((s.kinetic + s.potential - s.energy).abs() <= 1e-12 * e0);
        }
        let res = dissipation_residual(&tr);
        assert!(res.max_relative() <= 1e-9);
        assert!(tr.samples.iter().all(|s| s.dissipated_increment == 0.0));
    }

    #[test]
    fn damped_linear_ledger_and_monotonicity() {
        let (m, ops) = setup(2);
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        let a: Vec<f64> = m.vertices().iter().map(|x| if x.x > 0.0 { 1.5 } else { 0.0 }).collect();
        let s0 = initial_state(&m, &ops, &InitialData::Random { seed: 7, amplitude: 1.0 }).unwrap();
        let tr = simulate(&ops, &a, g, s0, params(0.05, 5.0, 3)).unwrap();
        let e0 = tr.initial_energy();
        assert!(dissipation_residual(&tr).max_raw() <= 1e-10 * e0);
        assert!(tr.max_energy_increase() <= 1e-9 * e0);
        assert!(tr.samples.iter().all(|s| s.dissipated_increment >= -1e-9 * e0));
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn nonlinear_ledger_converges_at_second_order() {
        let (m, ops) = setup(2);
        let g = make_feedback(FeedbackKind::Power { exponent: 3.0 }).unwrap();
        let a = vec![2.0; ops.dim()];
        let s0 = initial_state(&m, &ops, &InitialData::Random { seed: 3, amplitude: 0.5 }).unwrap();
        let h = 0.01;
        let errs: Vec<f64> = [4, 2, 1]
            .iter()
            .map(|&k| {
                let dt = k as f64 * h;
                let tr = simulate(&ops, &a, g, s0.clone(), params(dt, 1.0, 8 / k)).unwrap();
                dissipation_residual(&tr).max_raw()
            })
            .collect();
        let o1 = (errs[0] / errs[1]).log2();
        let o2 = (errs[1] / errs[2]).log2();
        assert!(o1 >= 1.9 && o2 >= 1.9, "{errs:?} {o1} {o2}");
    }

    #[test]
    fn random_initial_data_is_deterministic_and_zero_mean() {
        let (m, ops) = setup(2);
        let d = InitialData::Random { seed: 11, amplitude: 2.0 };
        let a = initial_state(&m, &ops, &d).unwrap();
        let b = initial_state(&m, &ops, &d).unwrap();
        assert_eq!(a, b);
        assert!(a.mean_defect(&ops) <= 1e-12);
        let c = initial_state(&m, &ops, &InitialData::Random { seed: 12, amplitude: 2.0 }).unwrap();
        assert_ne!(a.u, c.u);
    }

    #[test]
    fn csv_shape() {
        let (m, ops) = setup(1);
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        let s0 = initial_state(&m, &ops, &InitialData::Random { seed: 1, amplitude: 1.0 }).unwrap();
        let mut p = params(0.1, 1.0, 2);
        p.record_snapshots = true;
        let tr = simulate(&ops, &vec![1.0; ops.dim()], g, s0, p).unwrap();
        let csv = tr.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,E,kinetic,potential,dissipated_increment,dissipation_residual");
        assert_eq!(lines.len(), 1 + tr.samples.len());
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 6));
        let snap = tr.snapshots_csv().unwrap();
        assert_eq!(snap.lines().count(), 1 + tr.samples.len() * m.num_vertices());
    }
}

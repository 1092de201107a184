//! Uniform damping with linear feedback: the first sphere mode obeys `u'' + a u' + λ u = 0`,
//! so after the transient `E ∝ exp(−(a − √(a² − 4λ)) t)` in the overdamped regime.

use dampwave::dynamics::{initial_state, make_feedback, simulate, FeedbackKind, InitialData, SimulationParams};
use dampwave::mesh::generate_icosphere;
use dampwave::operators::DiscreteOperators;
use dampwave::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = generate_icosphere(Vec3::zeros(), 1.0, 3)?;
    let ops = DiscreteOperators::assemble(&m)?;
    let g = make_feedback(FeedbackKind::Linear { slope: 1.0 })?;
    let s0 = initial_state(&m, &ops, &InitialData::Mode { index: 1, amplitude: 1.0 })?;
    let params = SimulationParams {
        dt: 0.01,
        t_max: 10.0,
        sample_stride: 50,
        record_snapshots: false,
    };
    for a in [3.0, 4.0, 6.0] {
        let tr = simulate(&ops, &vec![a; ops.dim()], g, s0.clone(), params)?;
        let n = tr.samples.len();
        let (s1, s2) = (&tr.samples[n / 2], &tr.samples[n - 1]);
        let rate = -(s2.energy / s1.energy).ln() / (s2.t - s1.t);
        let modal = a - (a * a - 8.0f64).sqrt();
        println!("a = {a}: measured rate {rate:.5}, modal {modal:.5}");
    }
    Ok(())
}

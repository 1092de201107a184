//! The multiplier identity with `q = x − x0` on recorded snapshots: its residual shrinks as the
//! mesh and the time step are refined together.

use dampwave::dynamics::{
    initial_state, make_feedback, multiplier_residual, simulate, FeedbackKind, InitialData, SimulationParams,
};
use dampwave::geometry::{classify_visibility, shape_operator, vertex_normals_and_areas};
use dampwave::mesh::generate_icosphere;
use dampwave::operators::DiscreteOperators;
use dampwave::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x0 = Vec3::new(0.0, 0.0, 3.0);
    for (s, dt) in [(2, 0.04), (3, 0.02), (4, 0.01)] {
        let m = generate_icosphere(Vec3::zeros(), 1.0, s)?;
        let fr = vertex_normals_and_areas(&m)?;
        let curv = shape_operator(&m, &fr.normals)?;
        let decomp = classify_visibility(&m, &fr.normals, x0);
        let ops = DiscreteOperators::assemble(&m)?;
        let a: Vec<f64> = m.vertices().iter().map(|x| if x.z < 0.0 { 1.0 } else { 0.0 }).collect();
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 })?;
        let s0 = initial_state(&m, &ops, &InitialData::Random { seed: 4, amplitude: 1.0 })?;
        let params = SimulationParams {
            dt,
            t_max: 4.0,
            sample_stride: 1,
            record_snapshots: true,
        };
        let traj = simulate(&ops, &a, g, s0, params)?;
        let r = multiplier_residual(&m, &ops, &traj, &decomp, &curv, &a)?;
        println!(
            "subdiv {s}, dt {dt}: boundary {:+.4} divergence {:+.4} hessian {:+.4} damping {:+.4} → normalized residual {:.3e}",
            r.boundary, r.divergence, r.hessian, r.damping, r.normalized
        );
    }
    Ok(())
}

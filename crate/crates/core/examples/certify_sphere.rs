//! Simulates locally damped waves on the sphere (undamped hidden cap, cubic feedback) and
//! certifies the sampled energy against the comparison envelope.

use dampwave::decay::{build_chain, certify, construct_h};
use dampwave::dynamics::{initial_state, make_feedback, simulate, FeedbackKind, InitialData, SimulationParams};
use dampwave::geometry::{
    build_damping, classify_visibility, shape_operator, vertex_normals_and_areas, DampingParams, PatchSelection,
};
use dampwave::mesh::generate_icosphere;
use dampwave::operators::{first_nonzero_eigenvalue, DiscreteOperators};
use dampwave::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = generate_icosphere(Vec3::zeros(), 1.0, 3)?;
    let fr = vertex_normals_and_areas(&m)?;
    let curv = shape_operator(&m, &fr.normals)?;
    let mut decomp = classify_visibility(&m, &fr.normals, Vec3::new(0.0, 0.0, 2.0));
    decomp.select_patches(&m, &PatchSelection::AllOfM0)?;
    let params = DampingParams {
        a0: 1.0,
        a_max: 1.0,
        eps_tube: 0.35,
        eps_umb: 0.1,
        tol_h: None,
        waive_admissibility: false,
    };
    let damping = build_damping(&m, &decomp, &curv, &params)?;
    let damped = damping.a.iter().filter(|&&a| a > 0.0).count();
    println!("damped vertices: {damped} / {}", m.num_vertices());

    let ops = DiscreteOperators::assemble(&m)?;
    let t0 = 4.0 / first_nonzero_eigenvalue(&ops.stiffness, &ops.mass)?.sqrt();
    let g = make_feedback(FeedbackKind::Power { exponent: 3.0 })?;
    let s0 = initial_state(&m, &ops, &InitialData::Random { seed: 1, amplitude: 1.0 })?;
    let sim = SimulationParams {
        dt: 0.02,
        t_max: 4.5 * t0,
        sample_stride: 5,
        record_snapshots: false,
    };
    let traj = simulate(&ops, &damping.a, g, s0, sim)?;
    let chain = build_chain(construct_h(&g)?, m.total_area() * t0, traj.a_inf, g.k0(), 1.0)?;
    let cert = certify(&traj, &chain, t0)?;
    print!("{}", cert.report);
    Ok(())
}

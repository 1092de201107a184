use super::{DynamicsError, Trajectory};
use crate::geometry::{CurvatureField, RegionDecomposition};
use crate::operators::DiscreteOperators;
use crate::{SurfaceMesh, Vec3};
use nalgebra::Matrix3;

/// The four terms of the multiplier identity with `q = m = x − x0`, integrated over the run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiplierReport {
    /// `[∫ u_t m_T·∇u]₀ᵀ`.
    pub boundary: f64,
    /// `½ ∫∫ (2 + 2H m·ν)(|u_t|² − |∇u|²)`.
    pub divergence: f64,
    /// `∫∫ |∇u|² + (m·ν) ∇u·B·∇u`.
    pub hessian: f64,
    /// `∫∫ a g(u_t) m_T·∇u`.
    pub damping: f64,
    /// `|boundary + divergence + hessian + damping|`.
    pub residual: f64,
    /// `residual` over the largest term magnitude (0 when every term vanishes).
    pub normalized: f64,
}

struct FaceGeometry {
    area: f64,
    mt: Vec3,
    mn: f64,
    h: f64,
    b: Matrix3<f64>,
}

/// Evaluates every term of the identity on the recorded snapshots. Face integrals use the
/// face-constant gradient, a face normal/centroid for `m`, and vertex averages for `H`, `B`
/// and the velocity terms; time integrals use the trapezoidal rule on the samples.
pub fn multiplier_residual(
    mesh: &SurfaceMesh,
    ops: &DiscreteOperators,
    traj: &Trajectory,
    decomp: &RegionDecomposition,
    curv: &CurvatureField,
    a: &[f64],
) -> Result<MultiplierReport, DynamicsError> {
    let snaps = traj.snapshots.as_ref().ok_or(DynamicsError::MissingSnapshots)?;
    let faces: Vec<FaceGeometry> = mesh
        .triangles()
        .iter()
        .enumerate()
        .map(|(f, tri)| {
            let p = mesh.triangle_points(f);
            let nu = mesh.triangle_cross(f).normalize();
            let m = (p[0] + p[1] + p[2]) / 3.0 - decomp.x0;
            let mn = m.dot(&nu);
            FaceGeometry {
                area: ops.face_areas[f],
                mt: m - nu * mn,
                mn,
                h: tri.iter().map(|&v| curv.h[v]).sum::<f64>() / 3.0,
                b: tri.iter().map(|&v| curv.tensor(v)).sum::<Matrix3<f64>>() / 3.0,
            }
        })
        .collect();

    let g = traj.feedback;
    // (boundary integrand, divergence, hessian, damping) at one time
    let terms = |u: &[f64], v: &[f64]| -> [f64; 4] {
        let grads = ops.gradient(mesh, u);
        let mut out = [0.0; 4];
        for ((tri, fg), du) in mesh.triangles().iter().zip(&faces).zip(&grads) {
            let vt_avg = tri.iter().map(|&k| v[k]).sum::<f64>() / 3.0;
            let vt_sq = tri.iter().map(|&k| v[k] * v[k]).sum::<f64>() / 3.0;
            let damp = tri.iter().map(|&k| a[k] * g.eval(v[k])).sum::<f64>() / 3.0;
            let mt_grad = fg.mt.dot(du);
            let grad_sq = du.norm_squared();
            out[0] += fg.area * vt_avg * mt_grad;
            out[1] += fg.area * 0.5 * (2.0 + 2.0 * fg.h * fg.mn) * (vt_sq - grad_sq);
            out[2] += fg.area * (grad_sq + fg.mn * du.dot(&(fg.b * du)));
            out[3] += fg.area * damp * mt_grad;
        }
        out
    };

    let per_sample: Vec<[f64; 4]> = snaps.iter().map(|(u, v)| terms(u, v)).collect();
    let mut integrals = [0.0; 3];
    for (w, s) in per_sample.windows(2).zip(traj.samples.windows(2)) {
        let dt = s[1].t - s[0].t;
        for k in 0..3 {
            integrals[k] += 0.5 * dt * (w[0][k + 1] + w[1][k + 1]);
        }
    }
    let boundary = per_sample.last().map_or(0.0, |l| l[0]) - per_sample.first().map_or(0.0, |f| f[0]);
    let [divergence, hessian, damping] = integrals;
    let residual = (boundary + divergence + hessian + damping).abs();
    let scale = [boundary, divergence, hessian, damping]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(MultiplierReport {
        boundary,
        divergence,
        hessian,
        damping,
        residual,
        normalized: if scale > 0.0 { residual / scale } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{initial_state, make_feedback, simulate, FeedbackKind, InitialData, SimulationParams, WaveState};
    use crate::geometry::{classify_visibility, shape_operator, vertex_normals_and_areas};
    use crate::mesh::generate_icosphere;

    fn run(subdiv: u32, dt: f64, zero: bool) -> MultiplierReport {
        let mesh = generate_icosphere(Vec3::zeros(), 1.0, subdiv).unwrap();
        let ops = DiscreteOperators::assemble(&mesh).unwrap();
        let fr = vertex_normals_and_areas(&mesh).unwrap();
        let curv = shape_operator(&mesh, &fr.normals).unwrap();
        let decomp = classify_visibility(&mesh, &fr.normals, Vec3::new(0.0, 0.0, 3.0));
        let a = vec![1.0; mesh.num_vertices()];
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        let s0 = if zero {
            WaveState::zero(mesh.num_vertices())
        } else {
            initial_state(&mesh, &ops, &InitialData::Random { seed: 5, amplitude: 1.0 }).unwrap()
        };
        let p = SimulationParams {
            dt,
            t_max: 1.0,
            sample_stride: 1,
            record_snapshots: true,
        };
        let tr = simulate(&ops, &a, g, s0, p).unwrap();
        multiplier_residual(&mesh, &ops, &tr, &decomp, &curv, &a).unwrap()
    }

    #[test]
    fn zero_trajectory_has_zero_residual() {
        let r = run(2, 0.1, true);
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.normalized, 0.0);
    }

    #[test]
    fn residual_decreases_under_refinement() {
        let coarse = run(3, 0.04, false);
        let fine = run(4, 0.02, false);
        assert!(fine.normalized < coarse.normalized, "{coarse:?} {fine:?}");
    }

    #[test]
    fn missing_snapshots_is_an_error() {
        let mesh = generate_icosphere(Vec3::zeros(), 1.0, 1).unwrap();
        let ops = DiscreteOperators::assemble(&mesh).unwrap();
        let fr = vertex_normals_and_areas(&mesh).unwrap();
        let curv = shape_operator(&mesh, &fr.normals).unwrap();
        let decomp = classify_visibility(&mesh, &fr.normals, Vec3::zeros());
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        let a = vec![0.0; mesh.num_vertices()];
        let p = SimulationParams {
            dt: 0.1,
            t_max: 0.5,
            sample_stride: 1,
            record_snapshots: false,
        };
        let tr = simulate(&ops, &a, g, WaveState::zero(mesh.num_vertices()), p).unwrap();
        assert!(matches!(
            multiplier_residual(&mesh, &ops, &tr, &decomp, &curv, &a),
            Err(DynamicsError::MissingSnapshots)
        ));
    }
}

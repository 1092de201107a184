//! Principal curvatures on the sphere and on the torus, under `B = -dN`.
//!
//! On the torus `R = 2, r = 1` the meridian curvature is `-1` and the parallel one is
//! `-cos φ / (2 + cos φ)`, so the outer equator has `(-1, -1/3)` and the inner one `(-1, 1)`.

use dampwave::geometry::{shape_operator, vertex_normals_and_areas};
use dampwave::mesh::{generate_icosphere, generate_torus};
use dampwave::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for s in 2..=5 {
        let m = generate_icosphere(Vec3::zeros(), 1.0, s)?;
        let fr = vertex_normals_and_areas(&m)?;
        let c = shape_operator(&m, &fr.normals)?;
        let err = c.h.iter().fold(0.0f64, |e, h| e.max((h + 1.0).abs()));
        println!("sphere subdiv {s}: max |H + 1| = {err:.2e}");
    }
    for n in [32, 64, 128] {
        let t = generate_torus(Vec3::zeros(), 2.0, 1.0, n, n)?;
        let fr = vertex_normals_and_areas(&t)?;
        let c = shape_operator(&t, &fr.normals)?;
        let mut err: f64 = 0.0;
        for (v, x) in t.vertices().iter().enumerate() {
            let rho = x.x.hypot(x.y);
            let cos_phi = rho - 2.0;
            let exact = [-1.0, -cos_phi / rho];
            let (lo, hi) = (exact[0].min(exact[1]), exact[0].max(exact[1]));
            err = err.max((c.k1[v] - lo).abs()).max((c.k2[v] - hi).abs());
        }
        println!("torus {n}x{n}: max principal-curvature error = {err:.2e}");
    }
    Ok(())
}

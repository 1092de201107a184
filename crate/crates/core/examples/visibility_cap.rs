//! The visible region M1 = {(x − x0)·ν > 0} for an observer outside the unit sphere.
//!
//! For `x0 = (0, 0, d)` the condition is `z < 1/d`, a cap of area fraction `(1 + 1/d) / 2`.

use dampwave::geometry::{classify_visibility, vertex_normals_and_areas, PatchSelection};
use dampwave::mesh::generate_icosphere;
use dampwave::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = generate_icosphere(Vec3::zeros(), 1.0, 4)?;
    let fr = vertex_normals_and_areas(&m)?;
    println!("d,fraction,exact,patches");
    for d in [1.5, 2.0, 3.0, 5.0] {
        let mut decomp = classify_visibility(&m, &fr.normals, Vec3::new(0.0, 0.0, d));
        decomp.select_patches(&m, &PatchSelection::AllOfM0)?;
        let frac = decomp.m1_area_fraction(&fr.areas);
        println!("{d},{frac:.5},{:.5},{}", 0.5 * (1.0 + 1.0 / d), decomp.patches.len());
    }
    Ok(())
}

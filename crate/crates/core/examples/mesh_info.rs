//! Generates the two reference surfaces, validates them and round-trips one through OFF.

use dampwave::mesh::{generate_icosphere, generate_torus, parse_off, validate_closed_manifold, write_off};
use dampwave::{SurfaceMesh, Vec3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sphere = generate_icosphere(Vec3::zeros(), 1.0, 3)?;
    let torus = generate_torus(Vec3::zeros(), 2.0, 1.0, 48, 24)?;
    for (name, m) in [("icosphere:1:3", &sphere), ("torus:2:1:48:24", &torus)] {
        println!("# {name}");
        print!("{}", validate_closed_manifold(m));
        println!("area = {:.6}  volume = {:.6}\n", m.total_area(), m.signed_volume());
    }

    let (v, f) = parse_off(&write_off(&sphere))?;
    let back = SurfaceMesh::new(v, f)?;
    assert_eq!(back.num_triangles(), sphere.num_triangles());
    println!("OFF round trip: {} vertices, {} faces", back.num_vertices(), back.num_triangles());
    Ok(())
}

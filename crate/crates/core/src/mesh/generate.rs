use super::{MeshError, SurfaceMesh};
use crate::Vec3;
use std::collections::HashMap;
use std::f64::consts::PI;

pub const MAX_ICOSPHERE_SUBDIVISIONS: u32 = 8;

/// Icosahedron refined by 4-to-1 midpoint subdivision, every vertex projected onto the sphere.
pub fn generate_icosphere(
    center: Vec3,
    radius: f64,
    subdivisions: u32,
) -> Result<SurfaceMesh, MeshError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(MeshError::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if subdivisions > MAX_ICOSPHERE_SUBDIVISIONS {
        return Err(MeshError::SubdivisionLimit(subdivisions));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut unit: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for &[a, b, c] in &tris {
            let ab = mid(a, b, &mut unit);
            let bc = mid(b, c, &mut unit);
            let ca = mid(c, a, &mut unit);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    let vertices = unit.into_iter().map(|u| center + u * radius).collect();
    SurfaceMesh::new(vertices, tris)
}

/// Torus of revolution about the z axis through `center`.
///
/// Vertex `i * nv + j` sits at major angle `2πi/nu` and minor angle `2πj/nv`; minor angle 0 is the
/// outer equator, `π` the inner one.
pub fn generate_torus(
    center: Vec3,
    big_r: f64,
    r: f64,
    nu: usize,
    nv: usize,
) -> Result<SurfaceMesh, MeshError> {
    if !(r > 0.0) || !(big_r > 0.0) {
        return Err(MeshError::InvalidParameter(format!(
            "torus radii must be positive, got R = {big_r}, r = {r}"
        )));
    }
    if r >= big_r {
        return Err(MeshError::SelfIntersectingTorus { big_r, r });
    }
    if nu < 8 || nv < 8 {
        return Err(MeshError::InvalidParameter(format!(
            "torus resolution must be at least 8×8, got {nu}×{nv}"
        )));
    }
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let theta = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let phi = 2.0 * PI * j as f64 / nv as f64;
            let ring = big_r + r * phi.cos();
            vertices.push(center + Vec3::new(ring * theta.cos(), ring * theta.sin(), r * phi.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut tris = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    SurfaceMesh::new(vertices, tris)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate_closed_manifold;

    #[test]
    fn base_icosahedron() {
        let m = generate_icosphere(Vec3::zeros(), 1.0, 0).unwrap();
        assert_eq!((m.num_vertices(), m.num_triangles(), m.num_edges()), (12, 20, 30));
    }

    #[test]
    fn face_count_grows_by_four() {
        let m = generate_icosphere(Vec3::zeros(), 1.0, 2).unwrap();
        assert_eq!(m.num_triangles(), 320);
    }

    #[test]
    fn vertices_on_sphere() {
        let c = Vec3::new(0.3, -1.0, 2.0);
        let m = generate_icosphere(c, 2.5, 3).unwrap();
        for x in m.vertices() {
            assert!(((x - c).norm() - 2.5).abs() <= 1e-12 * 2.5);
        }
        assert!(m.signed_volume() > 0.0);
    }

    #[test]
    fn subdivision_guard() {
        assert!(matches!(
            generate_icosphere(Vec3::zeros(), 1.0, 9),
            Err(MeshError::SubdivisionLimit(9))
        ));
        assert!(generate_icosphere(Vec3::zeros(), -1.0, 1).is_err());
    }

    #[test]
    fn icosphere_area_radius_two() {
        let m = generate_icosphere(Vec3::zeros(), 2.0, 3).unwrap();
        let exact = 16.0 * PI;
        assert!((m.total_area() - exact).abs() / exact < 0.01);
    }

    #[test]
    fn area_refinement_is_monotone() {
        let areas: Vec<f64> = (0..6)
            .map(|s| generate_icosphere(Vec3::zeros(), 1.0, s).unwrap().total_area())
            .collect();
        for w in areas.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let deficits: Vec<f64> = areas.iter().map(|a| 4.0 * PI - a).collect();
        for w in deficits[1..].windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..4.5).contains(&ratio), "deficit ratio {ratio}");
        }
    }

    #[test]
    fn torus_counts_and_area() {
        let m = generate_torus(Vec3::zeros(), 2.0, 1.0, 32, 32).unwrap();
        assert_eq!((m.num_vertices(), m.num_triangles()), (1024, 2048));
        assert_eq!(m.euler_characteristic(), 0);
        let m = generate_torus(Vec3::zeros(), 2.0, 1.0, 64, 64).unwrap();
        let exact = 8.0 * PI * PI;
        assert!((m.total_area() - exact).abs() / exact < 0.01);
        assert!(validate_closed_manifold(&m).is_valid());
    }

    #[test]
    fn torus_rejects_fat_tube() {
        assert!(matches!(
            generate_torus(Vec3::zeros(), 1.0, 1.0, 16, 16),
            Err(MeshError::SelfIntersectingTorus { .. })
        ));
    }
}

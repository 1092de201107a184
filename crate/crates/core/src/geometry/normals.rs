use super::GeometryError;
use crate::{SurfaceMesh, Vec3};

#[derive(Clone, Debug)]
pub struct VertexFrame {
    pub normals: Vec<Vec3>,
    pub areas: Vec<f64>,
}

/// Per-vertex unit normals and barycentric areas.
///
/// Normals use Max's weights: each incident face contributes `(e1 × e2) / (|e1|² |e2|²)` for
/// its two edges leaving the vertex. The estimate is exact when the one-ring lies on a sphere.
pub fn vertex_normals_and_areas(mesh: &SurfaceMesh) -> Result<VertexFrame, GeometryError> {
    let n = mesh.num_vertices();
    let mut normals = vec![Vec3::zeros(); n];
    let mut areas = vec![0.0; n];
    for (f, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(f);
        let cross = (p[1] - p[0]).cross(&(p[2] - p[0]));
        let area = 0.5 * cross.norm();
        for k in 0..3 {
            let e1 = p[(k + 1) % 3] - p[k];
            let e2 = p[(k + 2) % 3] - p[k];
            normals[tri[k]] += cross / (e1.norm_squared() * e2.norm_squared());
            areas[tri[k]] += area / 3.0;
        }
    }
    for (v, nv) in normals.iter_mut().enumerate() {
        let len = nv.norm();
        if !(len > 1e-300) {
            return Err(GeometryError::ZeroNormal(v));
        }
        *nv /= len;
    }
    Ok(VertexFrame { normals, areas })
}

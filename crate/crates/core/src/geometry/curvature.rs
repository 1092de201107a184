use super::GeometryError;
use crate::{SurfaceMesh, Vec3};
use nalgebra::{Matrix2, Matrix3, Vector2};

/// Per-vertex shape operator data under the convention `B = -dN`.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    pub normals: Vec<Vec3>,
    /// Smaller principal curvature.
    pub k1: Vec<f64>,
    /// Larger principal curvature.
    pub k2: Vec<f64>,
    /// Mean curvature `(k1 + k2) / 2`.
    pub h: Vec<f64>,
    pub dir1: Vec<Vec3>,
    pub dir2: Vec<Vec3>,
    /// `sup_v max(|k1|, |k2|)`.
    pub norm_b: f64,
}

impl CurvatureField {
    /// The shape operator at `v` as a symmetric 3×3 matrix acting on the tangent plane
    /// (`ν` is in its kernel).
    pub fn tensor(&self, v: usize) -> Matrix3<f64> {
        let (d1, d2) = (self.dir1[v], self.dir2[v]);
        d1 * d1.transpose() * self.k1[v] + d2 * d2.transpose() * self.k2[v]
    }

    pub fn gap(&self, v: usize) -> f64 {
        (self.k1[v] - self.k2[v]).abs()
    }

    pub fn sup_abs_h(&self) -> f64 {
        self.h.iter().fold(0.0, |m, h| m.max(h.abs()))
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (helper - n * n.dot(&helper)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Least-squares fit of the normal differential over each vertex one-ring.
///
/// For every incident edge `e = x_j - x_i` the tangential parts of `e` and of `ν_j - ν_i` are
/// collected in a local frame; `dN` is the 2×2 map minimising the misfit, symmetrised, and
/// `B = -dN` is eigen-decomposed into `k1 ≤ k2`.
pub fn shape_operator(
    mesh: &SurfaceMesh,
    normals: &[Vec3],
) -> Result<CurvatureField, GeometryError> {
    let n = mesh.num_vertices();
    let mut out = CurvatureField {
        normals: normals.to_vec(),
        k1: vec![0.0; n],
        k2: vec![0.0; n],
        h: vec![0.0; n],
        dir1: vec![Vec3::zeros(); n],
        dir2: vec![Vec3::zeros(); n],
        norm_b: 0.0,
    };
    for v in 0..n {
        let nv = normals[v];
        let (e1, e2) = tangent_basis(&nv);
        let mut gram = Matrix2::zeros();
        let mut cross = Matrix2::zeros();
        for &w in mesh.neighbors(v) {
            let e = mesh.vertices()[w] - mesh.vertices()[v];
            let dn = normals[w] - nv;
            let et = Vector2::new(e.dot(&e1), e.dot(&e2));
            let dt = Vector2::new(dn.dot(&e1), dn.dot(&e2));
            let wgt = 1.0 / e.norm_squared();
            gram += et * et.transpose() * wgt;
            cross += dt * et.transpose() * wgt;
        }
        let det = gram.determinant();
        let tr = gram.trace();
        if mesh.neighbors(v).len() < 3 || !(det > 1e-10 * tr * tr) {
            return Err(GeometryError::RankDeficientFit(v));
        }
        let dn_map = cross * gram.try_inverse().ok_or(GeometryError::RankDeficientFit(v))?;
        let b = -(dn_map + dn_map.transpose()) * 0.5;
        let (k1, k2, u1, u2) = sym2_eigen(&b);
        out.k1[v] = k1;
        out.k2[v] = k2;
        out.h[v] = 0.5 * (k1 + k2);
        out.dir1[v] = e1 * u1.x + e2 * u1.y;
        out.dir2[v] = e1 * u2.x + e2 * u2.y;
        out.norm_b = out.norm_b.max(k1.abs()).max(k2.abs());
    }
    Ok(out)
}

/// Eigen-decomposition of a symmetric 2×2 matrix, ascending.
fn sym2_eigen(m: &Matrix2<f64>) -> (f64, f64, Vector2<f64>, Vector2<f64>) {
    let (a, b, d) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (lo, hi) = (mean - rad, mean + rad);
    // eigenvector of `hi`: rotate by the half angle of the off-diagonal form
    let theta = 0.5 * (2.0 * b).atan2(a - d);
    let u_hi = Vector2::new(theta.cos(), theta.sin());
    let u_lo = Vector2::new(-theta.sin(), theta.cos());
    (lo, hi, u_lo, u_hi)
}

use super::{CsrMatrix, OperatorError};
use crate::{SurfaceMesh, Vec3};

/// Gradients of the three hat functions of face `f`, lying in the face plane.
pub fn hat_gradients(mesh: &SurfaceMesh, f: usize) -> [Vec3; 3] {
    let p = mesh.triangle_points(f);
    let cross = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let double_area = cross.norm();
    let n = cross / double_area;
    let mut g = [Vec3::zeros(); 3];
    for (k, gk) in g.iter_mut().enumerate() {
        let opposite = p[(k + 2) % 3] - p[(k + 1) % 3];
        *gk = n.cross(&opposite) / double_area;
    }
    g
}

/// Constant tangential gradient of the linear interpolant of `values` on face `f`.
pub fn face_gradient(mesh: &SurfaceMesh, f: usize, values: [f64; 3]) -> Vec3 {
    let g = hat_gradients(mesh, f);
    g[0] * values[0] + g[1] * values[1] + g[2] * values[2]
}

/// Per-face gradients of a per-vertex field.
pub fn tangential_gradient(mesh: &SurfaceMesh, u: &[f64]) -> Vec<Vec3> {
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(f, &[a, b, c])| face_gradient(mesh, f, [u[a], u[b], u[c]]))
        .collect()
}

/// Cotangent stiffness: `K_uv = -(cot α + cot β)/2` off the diagonal, rows summing to zero.
pub fn assemble_stiffness(mesh: &SurfaceMesh) -> Result<CsrMatrix, OperatorError> {
    let mut triplets = Vec::with_capacity(mesh.num_triangles() * 9);
    for (f, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(f);
        for k in 0..3 {
            let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let a = p[(k + 1) % 3] - p[k];
            let b = p[(k + 2) % 3] - p[k];
            let cot = a.dot(&b) / a.cross(&b).norm();
            if !cot.is_finite() {
                return Err(OperatorError::NonFiniteCotangent(f));
            }
            let w = 0.5 * cot;
            triplets.push((i, j, -w));
            triplets.push((j, i, -w));
            triplets.push((i, i, w));
            triplets.push((j, j, w));
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.num_vertices(), triplets))
}

/// Lumped mass: one third of the incident triangle areas per vertex.
pub fn assemble_mass(mesh: &SurfaceMesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.num_vertices()];
    for (f, tri) in mesh.triangles().iter().enumerate() {
        let third = mesh.triangle_area(f) / 3.0;
        for &v in tri {
            m[v] += third;
        }
    }
    m
}

/// Zero-mean projection `u - (Σ M u / Σ M)`.
pub fn project_zero_mean(u: &[f64], mass: &[f64]) -> Vec<f64> {
    let mut out = u.to_vec();
    project_zero_mean_in_place(&mut out, mass);
    out
}

pub fn project_zero_mean_in_place(u: &mut [f64], mass: &[f64]) {
    let total: f64 = mass.iter().sum();
    let mean = u.iter().zip(mass).map(|(x, m)| x * m).sum::<f64>() / total;
    for x in u.iter_mut() {
        *x -= mean;
    }
}

/// Mass-weighted mean `Σ M u`.
pub fn mass_integral(u: &[f64], mass: &[f64]) -> f64 {
    u.iter().zip(mass).map(|(x, m)| x * m).sum()
}

/// Stiffness, lumped mass and per-face gradient maps of one mesh.
#[derive(Clone, Debug)]
pub struct DiscreteOperators {
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
    pub face_areas: Vec<f64>,
    pub hat_gradients: Vec<[Vec3; 3]>,
}

impl DiscreteOperators {
    pub fn assemble(mesh: &SurfaceMesh) -> Result<Self, OperatorError> {
        Ok(Self {
            stiffness: assemble_stiffness(mesh)?,
            mass: assemble_mass(mesh),
            face_areas: mesh.triangle_areas(),
            hat_gradients: (0..mesh.num_triangles())
                .map(|f| hat_gradients(mesh, f))
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn total_area(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// `½ (vᵀ M v + uᵀ K u)`.
    pub fn energy(&self, u: &[f64], v: &[f64]) -> f64 {
        0.5 * (self.kinetic2(v) + self.stiffness.quadratic_form(u))
    }

    /// `vᵀ M v`.
    pub fn kinetic2(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.mass).map(|(x, m)| m * x * x).sum()
    }

    /// Per-face gradient from the cached hat gradients.
    pub fn gradient(&self, mesh: &SurfaceMesh, u: &[f64]) -> Vec<Vec3> {
        mesh.triangles()
            .iter()
            .zip(&self.hat_gradients)
            .map(|(&[a, b, c], g)| g[0] * u[a] + g[1] * u[b] + g[2] * u[c])
            .collect()
    }

    /// `Σ_f area_f |∇u_f|²`.
    pub fn dirichlet_energy_by_faces(&self, mesh: &SurfaceMesh, u: &[f64]) -> f64 {
        self.gradient(mesh, u)
            .iter()
            .zip(&self.face_areas)
            .map(|(g, a)| a * g.norm_squared())
            .sum()
    }
}

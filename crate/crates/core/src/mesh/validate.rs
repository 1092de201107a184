use super::{opposite_traversal, SurfaceMesh};
use std::fmt;

/// Summary of the closed-manifold checks. Never fails; failures are carried in the flags.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub chi: i64,
    /// Every edge has exactly two incident triangles.
    pub is_closed: bool,
    /// Windings agree across every edge and the enclosed volume is positive.
    pub is_oriented: bool,
    /// Smallest triangle area over the mean triangle area.
    pub min_area_ratio: f64,
    pub boundary_edges: usize,
    pub non_manifold_edges: usize,
}

impl ValidationReport {
    /// True when every mesh invariant holds, including the degeneracy threshold.
    pub fn is_valid(&self) -> bool {
        self.is_closed && self.is_oriented && self.min_area_ratio > 1e-12
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "V = {}", self.vertices)?;
        writeln!(f, "E = {}", self.edges)?;
        writeln!(f, "F = {}", self.faces)?;
        writeln!(f, "chi = {}", self.chi)?;
        writeln!(f, "is_closed = {}", self.is_closed)?;
        writeln!(f, "is_oriented = {}", self.is_oriented)?;
        writeln!(f, "min_area_ratio = {}", crate::format::num(self.min_area_ratio))?;
        writeln!(f, "boundary_edges = {}", self.boundary_edges)?;
        writeln!(f, "non_manifold_edges = {}", self.non_manifold_edges)
    }
}

pub fn validate_closed_manifold(mesh: &SurfaceMesh) -> ValidationReport {
    let boundary_edges = mesh.edges().iter().filter(|e| e.faces.len() == 1).count();
    let non_manifold_edges = mesh.edges().iter().filter(|e| e.faces.len() > 2).count();
    let is_closed = boundary_edges == 0 && non_manifold_edges == 0 && mesh.num_triangles() > 0;
    let tris = mesh.triangles();
    let consistent = mesh.edges().iter().all(|e| match e.faces[..] {
        [f, g] => opposite_traversal(&tris[f], &tris[g]),
        _ => true,
    });
    let is_oriented = consistent && non_manifold_edges == 0 && mesh.signed_volume() > 0.0;
    let areas = mesh.triangle_areas();
    let mean = areas.iter().sum::<f64>() / areas.len().max(1) as f64;
    let min_area_ratio = if mean > 0.0 {
        areas.iter().copied().fold(f64::INFINITY, f64::min) / mean
    } else {
        0.0
    };
    ValidationReport {
        vertices: mesh.num_vertices(),
        edges: mesh.num_edges(),
        faces: mesh.num_triangles(),
        chi: mesh.euler_characteristic(),
        is_closed,
        is_oriented,
        min_area_ratio,
        boundary_edges,
        non_manifold_edges,
    }
}

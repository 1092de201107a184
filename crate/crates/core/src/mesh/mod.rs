//! Indexed triangle meshes of closed oriented surfaces.

mod generate;
mod io;
mod validate;

pub use generate::{generate_icosphere, generate_torus, MAX_ICOSPHERE_SUBDIVISIONS};
pub use io::{load_mesh, parse_obj, parse_off, save_off, write_off, MeshFormat};
pub use validate::{validate_closed_manifold, ValidationReport};

use crate::Vec3;
use std::collections::VecDeque;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("open surface: edge ({0}, {1}) has a single incident triangle")]
    OpenSurface(usize, usize),
    #[error("non-manifold edge ({a}, {b}) shared by {count} triangles")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("inconsistent orientation cannot be repaired (non-orientable surface)")]
    NonOrientable,
    #[error("degenerate triangle {face}: area ratio {ratio:e} to the mean area")]
    Degenerate { face: usize, ratio: f64 },
    #[error("triangle {face} references vertex {index} but only {count} vertices exist")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        count: usize,
    },
    #[error("subdivision limit exceeded: {0} > {max}", max = MAX_ICOSPHERE_SUBDIVISIONS)]
    SubdivisionLimit(u32),
    #[error("r ≥ R: tube radius {r} must be below the centre radius {big_r}")]
    SelfIntersectingTorus { big_r: f64, r: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// An undirected edge with its (at most two recorded) incident faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    /// Endpoints with `v[0] < v[1]`.
    pub v: [usize; 2],
    pub faces: Vec<usize>,
}

/// Indexed triangle mesh. Immutable once built.
///
/// [`SurfaceMesh::new`] enforces every closed-manifold invariant and repairs the winding so that
/// triangles are ordered counter-clockwise seen from outside. [`SurfaceMesh::from_raw`] skips the
/// checks so that broken inputs can still be inspected with [`validate_closed_manifold`].
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    neighbors: Vec<Vec<usize>>,
}

impl SurfaceMesh {
    /// Builds a mesh without validation. Indices must be in range.
    pub fn from_raw(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        for (f, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        face: f,
                        index: i,
                        count: vertices.len(),
                    });
                }
            }
        }
        let edges = build_edges(&triangles);
        let mut neighbors = vec![Vec::new(); vertices.len()];
        for e in &edges {
            neighbors[e.v[0]].push(e.v[1]);
            neighbors[e.v[1]].push(e.v[0]);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        Ok(Self {
            vertices,
            triangles,
            edges,
            neighbors,
        })
    }

    /// Builds a validated closed oriented mesh, flipping windings where needed.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let mut mesh = Self::from_raw(vertices, triangles)?;
        mesh.check_closed_manifold()?;
        mesh.repair_orientation()?;
        mesh.check_degeneracy()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sorted vertex one-ring.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    pub fn triangle_points(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Area-weighted (unnormalised) normal `(p1 - p0) × (p2 - p0)`.
    pub fn triangle_cross(&self, f: usize) -> Vec3 {
        let [p0, p1, p2] = self.triangle_points(f);
        (p1 - p0).cross(&(p2 - p0))
    }

    pub fn triangle_area(&self, f: usize) -> f64 {
        0.5 * self.triangle_cross(f).norm()
    }

    pub fn triangle_areas(&self) -> Vec<f64> {
        (0..self.num_triangles()).map(|f| self.triangle_area(f)).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.triangle_areas().iter().sum()
    }

    /// Volume enclosed by the surface (divergence theorem); positive for outward windings.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                self.vertices[a].dot(&self.vertices[b].cross(&self.vertices[c])) / 6.0
            })
            .sum()
    }

    pub fn edge_length(&self, e: &Edge) -> f64 {
        (self.vertices[e.v[0]] - self.vertices[e.v[1]]).norm()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| self.edge_length(e)).fold(0.0, f64::max)
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| self.edge_length(e))
            .fold(f64::INFINITY, f64::min)
    }

    /// Returns a copy with every vertex mapped by `x ↦ center + scale·(x - center)`.
    pub fn scaled(&self, center: Vec3, scale: f64) -> Self {
        let mut out = self.clone();
        for x in &mut out.vertices {
            *x = center + (*x - center) * scale;
        }
        out
    }

    /// Number of connected components of the vertex graph.
    pub fn connected_components(&self) -> usize {
        let mut seen = vec![false; self.num_vertices()];
        let mut count = 0;
        for start in 0..self.num_vertices() {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.neighbors[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        count
    }

    fn check_closed_manifold(&self) -> Result<(), MeshError> {
        for e in &self.edges {
            match e.faces.len() {
                2 => {}
                1 => return Err(MeshError::OpenSurface(e.v[0], e.v[1])),
                n => {
                    return Err(MeshError::NonManifoldEdge {
                        a: e.v[0],
                        b: e.v[1],
                        count: n,
                    })
                }
            }
        }
        Ok(())
    }

    fn check_degeneracy(&self) -> Result<(), MeshError> {
        let areas = self.triangle_areas();
        let mean = areas.iter().sum::<f64>() / areas.len().max(1) as f64;
        for (face, &a) in areas.iter().enumerate() {
            let ratio = a / mean;
            if !(ratio > 1e-12) {
                return Err(MeshError::Degenerate { face, ratio });
            }
        }
        Ok(())
    }

    /// BFS winding propagation per connected component, then a global flip per component so
    /// that the enclosed volume is positive.
    fn repair_orientation(&mut self) -> Result<(), MeshError> {
        let nf = self.triangles.len();
        let mut face_adj: Vec<Vec<usize>> = vec![Vec::new(); nf];
        for e in &self.edges {
            if let [f, g] = e.faces[..] {
                face_adj[f].push(g);
                face_adj[g].push(f);
            }
        }
        let mut visited = vec![false; nf];
        let mut components: Vec<Vec<usize>> = Vec::new();
        for seed in 0..nf {
            if visited[seed] {
                continue;
            }
            visited[seed] = true;
            let mut comp = vec![seed];
            let mut queue = VecDeque::from([seed]);
            while let Some(f) = queue.pop_front() {
                for &g in &face_adj[f] {
                    if visited[g] {
                        continue;
                    }
                    visited[g] = true;
                    if !opposite_traversal(&self.triangles[f], &self.triangles[g]) {
                        self.triangles[g].swap(1, 2);
                    }
                    comp.push(g);
                    queue.push_back(g);
                }
            }
            components.push(comp);
        }
        for e in &self.edges {
            if let [f, g] = e.faces[..] {
                if !opposite_traversal(&self.triangles[f], &self.triangles[g]) {
                    return Err(MeshError::NonOrientable);
                }
            }
        }
        for comp in components {
            let vol: f64 = comp
                .iter()
                .map(|&f| {
                    let [a, b, c] = self.triangles[f];
                    self.vertices[a].dot(&self.vertices[b].cross(&self.vertices[c]))
                })
                .sum();
            if vol < 0.0 {
                for f in comp {
                    self.triangles[f].swap(1, 2);
                }
            }
        }
        Ok(())
    }
}

fn build_edges(triangles: &[[usize; 3]]) -> Vec<Edge> {
    let mut half: Vec<(usize, usize, usize)> = Vec::with_capacity(triangles.len() * 3);
    for (f, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            half.push((a.min(b), a.max(b), f));
        }
    }
    half.sort_unstable();
    let mut edges: Vec<Edge> = Vec::with_capacity(half.len() / 2);
    for (a, b, f) in half {
        match edges.last_mut() {
            Some(e) if e.v == [a, b] => e.faces.push(f),
            _ => edges.push(Edge {
                v: [a, b],
                faces: vec![f],
            }),
        }
    }
    edges
}

/// Directed edges of a triangle.
pub(crate) fn directed_edges(t: &[usize; 3]) -> [(usize, usize); 3] {
    [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
}

/// Whether two triangles sharing an edge traverse it in opposite directions.
pub(crate) fn opposite_traversal(f: &[usize; 3], g: &[usize; 3]) -> bool {
    for (a, b) in directed_edges(f) {
        for (c, d) in directed_edges(g) {
            if a == d && b == c {
                return true;
            }
            if a == c && b == d {
                return false;
            }
        }
    }
    true
}

use super::GeometryError;
use crate::SurfaceMesh;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(PartialEq)]
struct Node {
    dist: f64,
    vertex: usize,
}

impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra on the edge graph with Euclidean edge lengths.
///
/// An upper bound on the geodesic distance to `source`.
pub fn geodesic_distance(mesh: &SurfaceMesh, source: &[usize]) -> Result<Vec<f64>, GeometryError> {
    if source.is_empty() {
        return Err(GeometryError::EmptySource);
    }
    let x = mesh.vertices();
    let mut dist = vec![f64::INFINITY; mesh.num_vertices()];
    let mut done = vec![false; mesh.num_vertices()];
    let mut heap = BinaryHeap::new();
    for &s in source {
        dist[s] = 0.0;
        heap.push(Node { dist: 0.0, vertex: s });
    }
    while let Some(Node { dist: d, vertex: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &w in mesh.neighbors(v) {
            let cand = d + (x[w] - x[v]).norm();
            if cand < dist[w] {
                dist[w] = cand;
                heap.push(Node { dist: cand, vertex: w });
            }
        }
    }
    Ok(dist)
}

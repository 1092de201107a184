//! Embedded differential geometry and the damping configuration built on it.
//!
//! All curvature quantities follow `B = -dN` for the exterior normal `N = ν`; the unit sphere has
//! `k1 = k2 = H = -1`.

mod curvature;
mod cutoff;
mod distance;
mod export;
mod normals;
mod regions;

pub use curvature::{shape_operator, CurvatureField};
pub use cutoff::{
    build_cutoff, build_damping, cutoff_profile, cutoff_profile_derivative, profile_bound,
    CutoffField, DampingParams, DampingProfile,
};
pub use distance::geodesic_distance;
pub use export::region_csv;
pub use normals::{vertex_normals_and_areas, VertexFrame};
pub use regions::{
    check_admissible_patch, classify_visibility, AdmissibilityReport, PatchSelection,
    RegionDecomposition,
};

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("vertex {0} has a zero-norm normal (degenerate vertex star)")]
    ZeroNormal(usize),
    #[error("rank-deficient shape-operator fit at vertex {0}")]
    RankDeficientFit(usize),
    #[error("distance source set is empty")]
    EmptySource,
    #[error("patch is empty")]
    EmptyPatch,
    #[error("tube width {eps} below resolution guard 2 × max edge = {guard}")]
    BelowResolution { eps: f64, guard: f64 },
    #[error("patch {patch} is too small for the double collar of width 2 × {eps}")]
    CollarDoesNotFit { patch: usize, eps: f64 },
    #[error("patch {patch} is not admissible (H_max = {h_max}, gap_max = {gap_max})")]
    NotAdmissible {
        patch: usize,
        h_max: f64,
        gap_max: f64,
    },
    #[error("seed vertex {0} is not in M0")]
    SeedNotInM0(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

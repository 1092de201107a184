//! Locally damped wave equation on closed triangulated surfaces.
//!
//! The crate covers the whole pipeline for
//!
//! ```text
//! u_tt - Δ_M u + a(x) g(u_t) = 0    on a closed surface M ⊂ R³
//! ```
//!
//! * [`mesh`]: closed oriented triangle meshes (OFF/OBJ I/O, icosphere and torus generators, validation).
//! * [`geometry`]: normals, vertex areas, the shape operator `B = -dN`, the visibility partition
//!   `M1 = {(x - x0)·ν > 0}`, admissibility of undamped patches, graph distances, the C¹ cut-off
//!   and the damping coefficient `a(x)`.
//! * [`operators`]: cotangent stiffness, lumped mass, per-face tangential gradients, the zero-mean
//!   projection and the Poincaré constant λ₁.
//! * [`dynamics`]: feedback laws, an implicit-midpoint integrator with an energy/dissipation ledger
//!   and the multiplier-identity diagnostic.
//! * [`decay`]: the `h → r → p → q` decay calculus, the comparison ODE `S' + q(S) = 0`, closed-form
//!   envelopes and trajectory certification.
//! * [`harness`]: experiment configuration, artifact directories, manifests and the CLI.
//!
//! # Sign convention
//!
//! The shape operator is `B = -dN` with respect to the exterior normal. The unit sphere therefore has
//! principal curvatures `k1 = k2 = -1` and mean curvature `H = -1`. Every admissibility test in
//! [`geometry`] uses this convention.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decay;
mod format;
pub mod dynamics;
pub mod geometry;
pub mod harness;
pub mod mesh;
pub mod operators;

pub use mesh::SurfaceMesh;

/// 3-vector used for embedding coordinates.
pub type Vec3 = nalgebra::Vector3<f64>;

use super::{
    check_admissible_patch, geodesic_distance, AdmissibilityReport, CurvatureField,
    GeometryError, RegionDecomposition,
};
use crate::SurfaceMesh;

/// One-dimensional cut-off profile.
///
/// `1` for `x ≤ 0`, `(x - 1)²` on `[1/2, 1]`, `0` for `x > 1`. On `(0, 1/2)` it is the cubic
/// `8x³ - 7x² + 1`, the Hermite interpolant of `η(0) = 1, η'(0) = 0, η(1/2) = 1/4,
/// η'(1/2) = -1`, which makes the profile C¹ and non-increasing.
pub fn cutoff_profile(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < 0.5 {
        (8.0 * x - 7.0) * x * x + 1.0
    } else if x <= 1.0 {
        (x - 1.0) * (x - 1.0)
    } else {
        0.0
    }
}

pub fn cutoff_profile_derivative(x: f64) -> f64 {
    if x <= 0.0 || x > 1.0 {
        0.0
    } else if x < 0.5 {
        (24.0 * x - 14.0) * x
    } else {
        2.0 * (x - 1.0)
    }
}

/// `sup_{0<x<1} |η'(x)|² / η(x)` by dense sampling.
pub fn profile_bound() -> f64 {
    const N: usize = 1_000_000;
    (1..N)
        .map(|i| {
            let x = i as f64 / N as f64;
            cutoff_profile_derivative(x).powi(2) / cutoff_profile(x)
        })
        .fold(0.0, f64::max)
}

/// Cut-off `η_ε(v) = η(d(v, M2) / ε)` on the mesh vertices.
#[derive(Clone, Debug)]
pub struct CutoffField {
    pub eta: Vec<f64>,
    /// Graph distance to M2.
    pub distance: Vec<f64>,
    pub eps_tube: f64,
    /// Profile constant `M` in `|∇η_ε|²/η_ε ≤ M / ε²`.
    pub m_bound: f64,
    /// Largest per-face `ε² |∇_T η|² / min_face(η)` over faces with positive minimum.
    pub discrete_ratio_max: f64,
}

pub fn build_cutoff(
    mesh: &SurfaceMesh,
    m2: &[usize],
    eps_tube: f64,
) -> Result<CutoffField, GeometryError> {
    let guard = 2.0 * mesh.max_edge_length();
    if !(eps_tube > guard) {
        return Err(GeometryError::BelowResolution { eps: eps_tube, guard });
    }
    let distance = geodesic_distance(mesh, m2)?;
    let eta: Vec<f64> = distance.iter().map(|d| cutoff_profile(d / eps_tube)).collect();

    let mut discrete_ratio_max: f64 = 0.0;
    for (f, tri) in mesh.triangles().iter().enumerate() {
        let e_min = tri.iter().map(|&v| eta[v]).fold(f64::INFINITY, f64::min);
        if e_min <= 0.0 {
            continue;
        }
        let grad = crate::operators::face_gradient(mesh, f, [eta[tri[0]], eta[tri[1]], eta[tri[2]]]);
        discrete_ratio_max = discrete_ratio_max.max(eps_tube * eps_tube * grad.norm_squared() / e_min);
    }
    Ok(CutoffField {
        eta,
        distance,
        eps_tube,
        m_bound: profile_bound(),
        discrete_ratio_max,
    })
}

#[derive(Clone, Debug)]
pub struct DampingParams {
    /// Required lower bound of `a` on M*.
    pub a0: f64,
    /// Value of `a` on M*; must be at least `a0`.
    pub a_max: f64,
    pub eps_tube: f64,
    /// Umbilicity threshold for `|k1 - k2|` on each patch.
    pub eps_umb: f64,
    /// Slack for `H ≤ 0`; `None` means `1e-6 · ‖B‖`.
    pub tol_h: Option<f64>,
    pub waive_admissibility: bool,
}

/// Damping coefficient `a(x)` and the region bookkeeping around it.
#[derive(Clone, Debug)]
pub struct DampingProfile {
    pub a: Vec<f64>,
    pub a0: f64,
    /// `max a`.
    pub a_inf: f64,
    pub eta: Vec<f64>,
    pub eps_tube: f64,
    pub m_bound: f64,
    pub discrete_ratio_max: f64,
    /// Damped region: closed `eps_tube`-neighbourhood of M2.
    pub m_star: Vec<bool>,
    pub m2: Vec<bool>,
    pub distance: Vec<f64>,
    pub admissibility: Vec<AdmissibilityReport>,
}

impl DampingProfile {
    /// `a ≡ value` on every vertex.
    pub fn uniform(n: usize, value: f64) -> Self {
        Self {
            a: vec![value; n],
            a0: value,
            a_inf: value,
            eta: vec![1.0; n],
            eps_tube: 0.0,
            m_bound: profile_bound(),
            discrete_ratio_max: 0.0,
            m_star: vec![value > 0.0; n],
            m2: vec![true; n],
            distance: vec![0.0; n],
            admissibility: Vec::new(),
        }
    }
}

/// Builds `a(v) = a_max · η((d(v, M2) - ε)⁺ / ε)`.
///
/// `a = a_max` on the closed ε-neighbourhood M* of M2 and rolls off to zero across a second
/// collar of width ε inside the patches. Each patch must keep at least one vertex deeper than
/// `2ε`.
pub fn build_damping(
    mesh: &SurfaceMesh,
    decomp: &RegionDecomposition,
    curv: &CurvatureField,
    params: &DampingParams,
) -> Result<DampingProfile, GeometryError> {
    let DampingParams {
        a0,
        a_max,
        eps_tube,
        eps_umb,
        tol_h,
        waive_admissibility,
    } = *params;
    if !(a0 > 0.0) || !(a_max >= a0) || !a_max.is_finite() {
        return Err(GeometryError::InvalidParameter(format!(
            "need 0 < a0 ≤ a_max, got a0 = {a0}, a_max = {a_max}"
        )));
    }
    let n = mesh.num_vertices();
    if decomp.patches.is_empty() {
        return Ok(DampingProfile::uniform(n, a_max));
    }

    let mut admissibility = Vec::with_capacity(decomp.patches.len());
    for (i, patch) in decomp.patches.iter().enumerate() {
        let report = check_admissible_patch(curv, patch, eps_umb, tol_h)?;
        if !report.admissible && !waive_admissibility {
            return Err(GeometryError::NotAdmissible {
                patch: i,
                h_max: report.h_max,
                gap_max: report.gap_max,
            });
        }
        admissibility.push(report);
    }

    let m2 = decomp.m2_mask();
    let m2_vertices: Vec<usize> = (0..n).filter(|&v| m2[v]).collect();
    if m2_vertices.is_empty() {
        return Err(GeometryError::InvalidParameter(
            "patches cover the whole surface; nothing left to damp".into(),
        ));
    }
    let cut = build_cutoff(mesh, &m2_vertices, eps_tube)?;

    for (i, patch) in decomp.patches.iter().enumerate() {
        if !patch.iter().any(|&v| cut.distance[v] > 2.0 * eps_tube) {
            return Err(GeometryError::CollarDoesNotFit { patch: i, eps: eps_tube });
        }
    }

    let a: Vec<f64> = cut
        .distance
        .iter()
        .map(|&d| a_max * cutoff_profile((d - eps_tube).max(0.0) / eps_tube))
        .collect();
    let m_star = cut.distance.iter().map(|&d| d <= eps_tube).collect();
    Ok(DampingProfile {
        a_inf: a.iter().copied().fold(0.0, f64::max),
        a,
        a0,
        eta: cut.eta,
        eps_tube,
        m_bound: cut.m_bound,
        discrete_ratio_max: cut.discrete_ratio_max,
        m_star,
        m2,
        distance: cut.distance,
        admissibility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{classify_visibility, shape_operator, vertex_normals_and_areas, PatchSelection};
    use crate::mesh::generate_icosphere;
    use crate::Vec3;

    #[test]
    fn profile_values() {
        assert_eq!(cutoff_profile(0.75), 1.0 / 16.0);
        assert_eq!(cutoff_profile(0.0), 1.0);
        assert_eq!(cutoff_profile(-3.0), 1.0);
        assert_eq!(cutoff_profile(1.5), 0.0);
        assert_eq!(cutoff_profile(1.0), 0.0);
        assert!((cutoff_profile(0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn profile_is_c1_and_non_increasing() {
        let h = 1e-7;
        for x in [0.0, 0.5, 1.0] {
            let left = (cutoff_profile(x) - cutoff_profile(x - h)) / h;
            let right = (cutoff_profile(x + h) - cutoff_profile(x)) / h;
            assert!((left - right).abs() < 1e-5, "kink at {x}");
            assert!((cutoff_profile(x - 1e-12) - cutoff_profile(x + 1e-12)).abs() < 1e-10);
        }
        let mut prev = cutoff_profile(-0.1);
        for i in 0..=12_000 {
            let x = -0.1 + i as f64 * 1e-4;
            let y = cutoff_profile(x);
            assert!(y <= prev + 1e-15 && (0.0..=1.0).contains(&y));
            prev = y;
        }
    }

    #[test]
    fn profile_derivative_matches_finite_differences() {
        for i in 1..1000 {
            let x = i as f64 / 1000.0 + 1e-4;
            let fd = (cutoff_profile(x + 1e-7) - cutoff_profile(x - 1e-7)) / 2e-7;
            assert!((fd - cutoff_profile_derivative(x)).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn profile_bound_at_least_four() {
        // on [1/2, 1) the ratio is exactly 4(x-1)²/(x-1)² = 4
        for x in [0.5, 0.6, 0.75, 0.99] {
            let r = cutoff_profile_derivative(x).powi(2) / cutoff_profile(x);
            assert!((r - 4.0).abs() < 1e-12);
        }
        let m = profile_bound();
        assert!(m >= 4.0);
        assert!(m < 10.0, "{m}");
    }

    fn cap_setup() -> (SurfaceMesh, RegionDecomposition, CurvatureField) {
        let m = generate_icosphere(Vec3::zeros(), 1.0, 3).unwrap();
        let fr = vertex_normals_and_areas(&m).unwrap();
        let c = shape_operator(&m, &fr.normals).unwrap();
        let mut d = classify_visibility(&m, &fr.normals, Vec3::new(0.0, 0.0, -2.0));
        d.select_patches(&m, &PatchSelection::AllOfM0).unwrap();
        (m, d, c)
    }

    #[test]
    fn cutoff_sandwich() {
        let (m, d, _) = cap_setup();
        let m2 = d.m2_mask();
        let src: Vec<usize> = (0..m.num_vertices()).filter(|&v| m2[v]).collect();
        let cut = build_cutoff(&m, &src, 0.35).unwrap();
        for v in 0..m.num_vertices() {
            assert!((0.0..=1.0).contains(&cut.eta[v]));
            if m2[v] {
                assert_eq!(cut.eta[v], 1.0);
            }
            if cut.distance[v] >= 0.35 {
                assert_eq!(cut.eta[v], 0.0);
            }
        }
        assert!(cut.discrete_ratio_max.is_finite());
        assert!(matches!(
            build_cutoff(&m, &src, 0.1),
            Err(GeometryError::BelowResolution { .. })
        ));
    }

    #[test]
    fn cap_damping_profile() {
        let (m, d, c) = cap_setup();
        let params = DampingParams {
            a0: 0.5,
            a_max: 1.0,
            eps_tube: 0.35,
            eps_umb: 0.1,
            tol_h: None,
            waive_admissibility: false,
        };
        let damp = build_damping(&m, &d, &c, &params).unwrap();
        let n = m.num_vertices();
        let star_min = (0..n)
            .filter(|&v| damp.m_star[v])
            .map(|v| damp.a[v])
            .fold(f64::INFINITY, f64::min);
        assert_eq!(star_min, 1.0);
        let star = damp.m_star.iter().filter(|&&b| b).count();
        let m2 = damp.m2.iter().filter(|&&b| b).count();
        assert!(star > m2);
        assert!((0..n).all(|v| !damp.m2[v] || damp.m_star[v]));
        for v in 0..n {
            assert!(damp.a[v] >= 0.0);
            if damp.distance[v] > 0.7 {
                assert_eq!(damp.a[v], 0.0);
            }
        }
        assert!((0..n).any(|v| damp.a[v] == 0.0));
        assert_eq!(damp.admissibility.len(), 1);
    }

    #[test]
    fn full_damping_without_patches() {
        let (m, mut d, c) = cap_setup();
        d.patches.clear();
        let params = DampingParams {
            a0: 0.5,
            a_max: 2.0,
            eps_tube: 0.35,
            eps_umb: 0.1,
            tol_h: None,
            waive_admissibility: false,
        };
        let damp = build_damping(&m, &d, &c, &params).unwrap();
        assert!(damp.a.iter().all(|&a| a == 2.0));
    }

    #[test]
    fn collar_must_fit() {
        let (m, d, c) = cap_setup();
        let params = DampingParams {
            a0: 0.5,
            a_max: 1.0,
            eps_tube: 0.6,
            eps_umb: 0.1,
            tol_h: None,
            waive_admissibility: false,
        };
        assert!(matches!(
            build_damping(&m, &d, &c, &params),
            Err(GeometryError::CollarDoesNotFit { .. })
        ));
    }

    #[test]
    fn bad_damping_levels() {
        let (m, d, c) = cap_setup();
        let params = DampingParams {
            a0: 0.0,
            a_max: 1.0,
            eps_tube: 0.35,
            eps_umb: 0.1,
            tol_h: None,
            waive_admissibility: false,
        };
        assert!(build_damping(&m, &d, &c, &params).is_err());
    }
}

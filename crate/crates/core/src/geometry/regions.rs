use super::{CurvatureField, GeometryError};
use crate::{SurfaceMesh, Vec3};
use std::collections::VecDeque;

/// Visibility partition for an observer `x0` plus the selected undamped patches.
#[derive(Clone, Debug)]
pub struct RegionDecomposition {
    pub x0: Vec3,
    /// `m(v)·ν(v) > 0`.
    pub in_m1: Vec<bool>,
    /// `m(v) = x_v - x0`.
    pub m_field: Vec<Vec3>,
    /// Tangential part `m - (m·ν)ν`.
    pub mt_field: Vec<Vec3>,
    pub m_dot_nu: Vec<f64>,
    /// `max_v |m(v)|`.
    pub r_max: f64,
    /// Vertex sets of the undamped patches, each inside M0. Empty until selected.
    pub patches: Vec<Vec<usize>>,
}

impl RegionDecomposition {
    pub fn in_m0(&self, v: usize) -> bool {
        !self.in_m1[v]
    }

    /// Vertices outside every patch (`M2 = M \ ∪ M0i`).
    pub fn m2_mask(&self) -> Vec<bool> {
        let mut mask = vec![true; self.in_m1.len()];
        for p in &self.patches {
            for &v in p {
                mask[v] = false;
            }
        }
        mask
    }

    /// Area fraction of M1 given per-vertex areas.
    pub fn m1_area_fraction(&self, areas: &[f64]) -> f64 {
        let total: f64 = areas.iter().sum();
        let m1: f64 = areas
            .iter()
            .zip(&self.in_m1)
            .filter(|(_, &inside)| inside)
            .map(|(a, _)| a)
            .sum();
        m1 / total
    }

    /// Edge-connected components of M0, each sorted, ordered by their smallest vertex.
    pub fn m0_components(&self, mesh: &SurfaceMesh) -> Vec<Vec<usize>> {
        let n = self.in_m1.len();
        let mut label = vec![usize::MAX; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if self.in_m1[s] || label[s] != usize::MAX {
                continue;
            }
            let id = comps.len();
            label[s] = id;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in mesh.neighbors(v) {
                    if !self.in_m1[w] && label[w] == usize::MAX {
                        label[w] = id;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Chooses the undamped patches.
    pub fn select_patches(
        &mut self,
        mesh: &SurfaceMesh,
        selection: &PatchSelection,
    ) -> Result<(), GeometryError> {
        let comps = self.m0_components(mesh);
        self.patches = match selection {
            PatchSelection::None => Vec::new(),
            PatchSelection::AllOfM0 => comps,
            PatchSelection::ComponentsContaining(seeds) => {
                let mut chosen: Vec<Vec<usize>> = Vec::new();
                for &s in seeds {
                    let comp = comps
                        .iter()
                        .find(|c| c.binary_search(&s).is_ok())
                        .ok_or(GeometryError::SeedNotInM0(s))?;
                    if !chosen.contains(comp) {
                        chosen.push(comp.clone());
                    }
                }
                chosen
            }
        };
        Ok(())
    }
}

/// How the undamped patches `M0i` are picked from M0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatchSelection {
    /// No patch: damping everywhere.
    None,
    /// Every connected component of M0.
    AllOfM0,
    /// The components of M0 containing the given seed vertices.
    ComponentsContaining(Vec<usize>),
}

pub fn classify_visibility(mesh: &SurfaceMesh, normals: &[Vec3], x0: Vec3) -> RegionDecomposition {
    let n = mesh.num_vertices();
    let mut out = RegionDecomposition {
        x0,
        in_m1: Vec::with_capacity(n),
        m_field: Vec::with_capacity(n),
        mt_field: Vec::with_capacity(n),
        m_dot_nu: Vec::with_capacity(n),
        r_max: 0.0,
        patches: Vec::new(),
    };
    for (x, nu) in mesh.vertices().iter().zip(normals) {
        let m = x - x0;
        let mn = m.dot(nu);
        out.in_m1.push(mn > 0.0);
        out.m_field.push(m);
        out.mt_field.push(m - nu * mn);
        out.m_dot_nu.push(mn);
        out.r_max = out.r_max.max(m.norm());
    }
    out
}

/// Curvature hypotheses on one undamped patch.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub h_max: f64,
    pub gap_max: f64,
    pub tol_h: f64,
    pub eps_umb: f64,
    pub admissible: bool,
}

/// `admissible = (max H ≤ tol_h) ∧ (max |k1 - k2| < eps_umb)` over the patch.
///
/// `tol_h` defaults to `1e-6 · ‖B‖` when `None`.
pub fn check_admissible_patch(
    curv: &CurvatureField,
    patch: &[usize],
    eps_umb: f64,
    tol_h: Option<f64>,
) -> Result<AdmissibilityReport, GeometryError> {
    if patch.is_empty() {
        return Err(GeometryError::EmptyPatch);
    }
    let tol_h = tol_h.unwrap_or(1e-6 * curv.norm_b);
    let h_max = patch
        .iter()
        .map(|&v| curv.h[v])
        .fold(f64::NEG_INFINITY, f64::max);
    let gap_max = patch.iter().map(|&v| curv.gap(v)).fold(0.0, f64::max);
    Ok(AdmissibilityReport {
        h_max,
        gap_max,
        tol_h,
        eps_umb,
        admissible: h_max <= tol_h && gap_max < eps_umb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{shape_operator, vertex_normals_and_areas};
    use crate::mesh::{generate_icosphere, generate_torus};

    #[test]
    fn centred_observer_sees_whole_sphere() {
        let m = generate_icosphere(Vec3::zeros(), 1.0, 2).unwrap();
        let fr = vertex_normals_and_areas(&m).unwrap();
        let d = classify_visibility(&m, &fr.normals, Vec3::zeros());
        assert!(d.in_m1.iter().all(|&b| b));
        assert!((d.r_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outside_observer_cap_fraction() {
        let m = generate_icosphere(Vec3::zeros(), 1.0, 4).unwrap();
        let fr = vertex_normals_and_areas(&m).unwrap();
        let d = classify_visibility(&m, &fr.normals, Vec3::new(0.0, 0.0, -2.0));
        let frac = d.m1_area_fraction(&fr.areas);
        assert!((frac - 0.75).abs() <= 0.02, "{frac}");
    }

    #[test]
    fn tangential_split() {
        let m = generate_torus(Vec3::zeros(), 2.0, 0.8, 24, 16).unwrap();
        let fr = vertex_normals_and_areas(&m).unwrap();
        let d = classify_visibility(&m, &fr.normals, Vec3::new(0.3, -2.0, 5.0));
        for v in 0..m.num_vertices() {
            let nu = fr.normals[v];
            assert!(d.mt_field[v].dot(&nu).abs() < 1e-10);
            let lhs = d.m_field[v].norm_squared();
            let rhs = d.mt_field[v].norm_squared() + d.m_dot_nu[v].powi(2);
            assert!((lhs - rhs).abs() < 1e-10);
            assert_eq!(d.in_m1[v], !d.in_m0(v));
        }
    }

    #[test]
    fn patch_selection_by_seed() {
        let m = generate_icosphere(Vec3::zeros(), 1.0, 3).unwrap();
        let fr = vertex_normals_and_areas(&m).unwrap();
        let mut d = classify_visibility(&m, &fr.normals, Vec3::new(0.0, 0.0, -2.0));
        let south = (0..m.num_vertices())
            .min_by(|&a, &b| m.vertices()[a].z.total_cmp(&m.vertices()[b].z))
            .unwrap();
        d.select_patches(&m, &PatchSelection::ComponentsContaining(vec![south]))
            .unwrap();
        assert_eq!(d.patches.len(), 1);
        assert!(d.patches[0].iter().all(|&v| d.in_m0(v)));
        let north = (0..m.num_vertices())
            .max_by(|&a, &b| m.vertices()[a].z.total_cmp(&m.vertices()[b].z))
            .unwrap();
        assert!(matches!(
            d.select_patches(&m, &PatchSelection::ComponentsContaining(vec![north])),
            Err(GeometryError::SeedNotInM0(_))
        ));
    }

    #[test]
    fn admissibility_on_sphere_and_torus() {
        let m = generate_icosphere(Vec3::zeros(), 1.0, 3).unwrap();
        let fr = vertex_normals_and_areas(&m).unwrap();
        let c = shape_operator(&m, &fr.normals).unwrap();
        let patch: Vec<usize> = (0..m.num_vertices()).filter(|&v| m.vertices()[v].z < -0.5).collect();
        let r = check_admissible_patch(&c, &patch, 0.1, None).unwrap();
        assert!(r.admissible);
        assert!(r.gap_max < 0.05 && (r.h_max + 1.0).abs() < 0.05);

        let (nu, nv) = (64, 64);
        let t = generate_torus(Vec3::zeros(), 2.0, 1.0, nu, nv).unwrap();
        let fr = vertex_normals_and_areas(&t).unwrap();
        let c = shape_operator(&t, &fr.normals).unwrap();
        let band: Vec<usize> = (0..nu).map(|i| i * nv + nv / 2).collect();
        let r = check_admissible_patch(&c, &band, 0.5, None).unwrap();
        assert!(!r.admissible);
        assert!((r.gap_max - 2.0).abs() < 0.1);
        assert!(check_admissible_patch(&c, &[], 0.5, None).is_err());
    }
}

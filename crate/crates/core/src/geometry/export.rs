use super::{CurvatureField, DampingProfile, RegionDecomposition};
use crate::format::num;
use std::fmt::Write as _;

/// Per-vertex table `vertex_id,k1,k2,H,in_M1,eta,a`.
///
/// Without a damping profile `eta` and `a` are written as zero.
pub fn region_csv(
    curv: &CurvatureField,
    decomp: &RegionDecomposition,
    damp: Option<&DampingProfile>,
) -> String {
    let mut s = String::from("vertex_id,k1,k2,H,in_M1,eta,a\n");
    for v in 0..curv.len() {
        let (eta, a) = damp.map_or((0.0, 0.0), |d| (d.eta[v], d.a[v]));
        let _ = writeln!(
            s,
            "{v},{},{},{},{},{},{}",
            num(curv.k1[v]),
            num(curv.k2[v]),
            num(curv.h[v]),
            u8::from(decomp.in_m1[v]),
            num(eta),
            num(a)
        );
    }
    s
}

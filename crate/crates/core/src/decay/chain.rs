use super::{DecayError, MonotoneFn};
use crate::dynamics::{FeedbackKind, FeedbackLaw};

const GRID: usize = 10_000;

/// The concave majorant `h` with `h(s g(s)) ≥ s² + g(s)²` on `|s| ≤ 1`.
///
/// Closed forms for the shipped families: `h(y) = (1 + k²)/k · y` for `g(s) = ks` and
/// `h(y) = 2 y^{2/(p+1)}` for the power laws. Verified on a `10⁴`-point grid either way.
pub fn construct_h(g: &FeedbackLaw) -> Result<MonotoneFn, DecayError> {
    let h = match g.kind {
        FeedbackKind::Linear { slope } => MonotoneFn::Linear {
            slope: (1.0 + slope * slope) / slope,
        },
        FeedbackKind::Power { exponent } | FeedbackKind::SaturatedPower { exponent, .. } => {
            MonotoneFn::Power {
                coef: 2.0,
                exponent: 2.0 / (exponent + 1.0),
            }
        }
    };
    verify_h(&h, g)?;
    Ok(h)
}

/// Least concave majorant of the samples `(s g(s), s² + g(s)²)`, `s ∈ [0, 1]`, via the upper
/// hull. Works for any feedback law; the grid used for verification is part of the samples.
pub fn concave_majorant(g: &FeedbackLaw) -> Result<MonotoneFn, DecayError> {
    let n = 2 * GRID;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(n + 1);
    pts.push((0.0, 0.0));
    for i in 1..=n {
        // the odd-symmetric curve only needs s ≥ 0; clustered towards 0 where it is steepest
        let t = i as f64 / n as f64;
        for s in [t, t * t] {
            let gs = g.eval(s);
            pts.push((s * gs, s * s + gs * gs));
        }
    }
    for i in 0..GRID {
        let s = (-1.0 + 2.0 * i as f64 / (GRID - 1) as f64).abs();
        let gs = g.eval(s);
        pts.push((s * gs, s * s + gs * gs));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        if let Some(last) = hull.last() {
            if last.0 == p.0 {
                hull.pop();
            }
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless it lies strictly above the chord a→p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    if hull.len() < 2 || hull[0] != (0.0, 0.0) {
        return Err(DecayError::MajorantFailed("degenerate sample hull".into()));
    }
    let (xs, ys) = hull.into_iter().unzip();
    let h = MonotoneFn::Tabulated { xs, ys };
    verify_h(&h, g)?;
    Ok(h)
}

/// Checks `h(s g(s)) ≥ s² + g(s)²` on `10⁴` points of `[−1, 1]` and `h(0) = 0`.
pub fn verify_h(h: &MonotoneFn, g: &FeedbackLaw) -> Result<(), DecayError> {
    if h.eval(0.0) != 0.0 {
        return Err(DecayError::MajorantFailed("h(0) ≠ 0".into()));
    }
    for i in 0..GRID {
        let s = -1.0 + 2.0 * i as f64 / (GRID - 1) as f64;
        let gs = g.eval(s);
        let need = s * s + gs * gs;
        if h.eval(s * gs) < need * (1.0 - 1e-12) {
            return Err(DecayError::MajorantFailed(format!(
                "h(s g(s)) = {} < {need} at s = {s}",
                h.eval(s * gs)
            )));
        }
    }
    Ok(())
}

/// `r`, `p`, `q` and the constants derived from `h` for one value of `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayChain {
    pub h: MonotoneFn,
    /// `r(y) = h(y / measΣ)`.
    pub r: MonotoneFn,
    /// `p(x) = (cI + r)⁻¹(L x)`.
    pub p: MonotoneFn,
    /// `q(x) = x − (I + p)⁻¹(x)`.
    pub q: MonotoneFn,
    /// `c = K0 / (measΣ (1 + ‖a‖_∞))`.
    pub c: f64,
    pub l: f64,
    pub k0: f64,
    pub meas_sigma: f64,
    pub a_inf: f64,
}

impl DecayChain {
    /// Slope `γ` of `p` when the chain is linear.
    pub fn linear_gamma(&self) -> Option<f64> {
        self.p.linear_slope()
    }

    /// Rebuilds the chain with another `L`.
    pub fn with_l(&self, l: f64) -> Result<Self, DecayError> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(DecayError::InvalidParameter(format!("L must be > 0, got {l}")));
        }
        Ok(chain_from_parts(self.h.clone(), self.meas_sigma, self.c, l, self.k0, self.a_inf))
    }

    /// `c x + r(x)`, the map inverted by `p`.
    pub fn c_plus_r(&self, x: f64) -> f64 {
        self.c * x + self.r.eval(x)
    }
}

pub fn build_chain(
    h: MonotoneFn,
    meas_sigma: f64,
    a_inf: f64,
    k0: f64,
    l: f64,
) -> Result<DecayChain, DecayError> {
    for (name, v) in [("measΣ", meas_sigma), ("K0", k0), ("L", l)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(DecayError::InvalidParameter(format!("{name} must be > 0, got {v}")));
        }
    }
    if !(a_inf >= 0.0) || !a_inf.is_finite() {
        return Err(DecayError::InvalidParameter(format!("‖a‖∞ must be ≥ 0, got {a_inf}")));
    }
    let c = k0 / (meas_sigma * (1.0 + a_inf));
    Ok(chain_from_parts(h, meas_sigma, c, l, k0, a_inf))
}

/// Assembles a chain from an explicit `c` (used for reference chains that do not come from a
/// run).
pub fn chain_from_parts(
    h: MonotoneFn,
    meas_sigma: f64,
    c: f64,
    l: f64,
    k0: f64,
    a_inf: f64,
) -> DecayChain {
    let r = MonotoneFn::Rescaled {
        inner: Box::new(h.clone()),
        scale: meas_sigma,
    };
    let p = MonotoneFn::ShiftedInverse {
        c,
        inner: Box::new(r.clone()),
        l,
    };
    let q = MonotoneFn::Resolvent {
        c,
        inner: Box::new(r.clone()),
        l,
    };
    DecayChain {
        h,
        r,
        p,
        q,
        c,
        l,
        k0,
        meas_sigma,
        a_inf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay::invert_increasing;
    use crate::dynamics::make_feedback;
    use std::f64::consts::PI;

    fn law(kind: FeedbackKind) -> FeedbackLaw {
        make_feedback(kind).unwrap()
    }

    #[test]
    fn linear_h_identity_on_grid() {
        let g = law(FeedbackKind::Linear { slope: 1.0 });
        let h = construct_h(&g).unwrap();
        for i in 0..GRID {
            let s = -1.0 + 2.0 * i as f64 / (GRID - 1) as f64;
            assert!((h.eval(s * s) - 2.0 * s * s).abs() <= 1e-15);
        }
    }

    #[test]
    fn cubic_h_is_two_sqrt() {
        let g = law(FeedbackKind::Power { exponent: 3.0 });
        let h = construct_h(&g).unwrap();
        assert_eq!(h, MonotoneFn::Power { coef: 2.0, exponent: 0.5 });
        for i in 0..GRID {
            let s = -1.0 + 2.0 * i as f64 / (GRID - 1) as f64;
            assert!(h.eval(s.powi(4)) >= s * s + s.powi(6) - 1e-15);
        }
    }

    #[test]
    fn hull_majorant_is_valid_and_below_closed_form() {
        for kind in [
            FeedbackKind::Linear { slope: 1.0 },
            FeedbackKind::Power { exponent: 3.0 },
            FeedbackKind::SaturatedPower { exponent: 2.0, slope: 0.5 },
        ] {
            let g = law(kind);
            let hull = concave_majorant(&g).unwrap();
            let closed = construct_h(&g).unwrap();
            assert_eq!(hull.eval(0.0), 0.0);
            for i in 1..=100 {
                let y = g.eval(1.0) * i as f64 / 100.0;
                // least concave majorant lies below any concave majorant
                assert!(hull.eval(y) <= closed.eval(y) * (1.0 + 1e-9), "{kind:?} {y}");
            }
            hull.check_increasing(1.0, 1000).unwrap();
        }
    }

    #[test]
    fn non_majorant_is_rejected() {
        let g = law(FeedbackKind::Linear { slope: 1.0 });
        assert!(verify_h(&MonotoneFn::Linear { slope: 1.5 }, &g).is_err());
    }

    #[test]
    fn unit_slope_chain_is_identity() {
        // c + slope(r) = 1 with L = 1
        let chain = chain_from_parts(MonotoneFn::Linear { slope: 2.0 }, 4.0, 0.5, 1.0, 1.0, 0.0);
        assert!((chain.p.eval(3.0) - 3.0).abs() < 1e-11);
        assert!((chain.q.eval(4.0) - 2.0).abs() < 1e-11);
        assert_eq!(chain.q.eval(0.0), 0.0);
    }

    #[test]
    fn sphere_constant_c() {
        let g = law(FeedbackKind::Linear { slope: 1.0 });
        let chain = build_chain(construct_h(&g).unwrap(), 4.0 * PI, 1.0, g.k0(), 1.0).unwrap();
        assert!((chain.c - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn inversion_round_trip_and_q_sandwich() {
        let g = law(FeedbackKind::Power { exponent: 3.0 });
        let chain = build_chain(construct_h(&g).unwrap(), 4.0 * PI, 2.0, g.k0(), 0.7).unwrap();
        for i in 0..1000 {
            let x = 10.0 * i as f64 / 999.0;
            let px = chain.p.eval(x);
            let lx = chain.l * x;
            assert!((chain.c_plus_r(px) - lx).abs() <= 1e-10 * (1.0 + lx), "{x}");
            let q = chain.q.eval(x);
            assert!((0.0..=x).contains(&q));
            let y = invert_increasing(|y| y + chain.p.eval(y), x).unwrap();
            assert!((q - (x - y)).abs() <= 1e-9 * (1.0 + x));
        }
        chain.q.check_increasing(10.0, 1000).unwrap();
    }

    #[test]
    fn rejects_nonpositive_l() {
        let h = MonotoneFn::Linear { slope: 2.0 };
        assert!(build_chain(h, 1.0, 0.0, 2.0, 0.0).is_err());
    }
}

use super::DynamicsError;
use std::fmt;
use std::str::FromStr;

/// Family of the velocity feedback `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeedbackKind {
    /// `g(s) = slope · s`.
    Linear { slope: f64 },
    /// `g(s) = sign(s)|s|^p` for `|s| ≤ 1`, `g(s) = s` beyond.
    Power { exponent: f64 },
    /// `g(s) = sign(s)|s|^p` for `|s| ≤ 1`, `g(s) = sign(s)(1 + slope(|s| - 1))` beyond.
    SaturatedPower { exponent: f64, slope: f64 },
}

/// A feedback law satisfying: continuous, nondecreasing, `g(s)s > 0` for `s ≠ 0`, and
/// `k_low|s| ≤ |g(s)| ≤ k_high|s|` for `|s| > 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackLaw {
    pub kind: FeedbackKind,
    pub k_low: f64,
    pub k_high: f64,
}

impl FeedbackLaw {
    pub fn eval(&self, s: f64) -> f64 {
        match self.kind {
            FeedbackKind::Linear { slope } => slope * s,
            FeedbackKind::Power { exponent } => {
                if s.abs() <= 1.0 {
                    s.signum() * s.abs().powf(exponent)
                } else {
                    s
                }
            }
            FeedbackKind::SaturatedPower { exponent, slope } => {
                if s.abs() <= 1.0 {
                    s.signum() * s.abs().powf(exponent)
                } else {
                    s.signum() * (1.0 + slope * (s.abs() - 1.0))
                }
            }
        }
    }

    /// `g'(s)`; one-sided (outer branch) at `|s| = 1`.
    pub fn derivative(&self, s: f64) -> f64 {
        match self.kind {
            FeedbackKind::Linear { slope } => slope,
            FeedbackKind::Power { exponent } => {
                if s.abs() < 1.0 {
                    exponent * s.abs().powf(exponent - 1.0)
                } else {
                    1.0
                }
            }
            FeedbackKind::SaturatedPower { exponent, slope } => {
                if s.abs() < 1.0 {
                    exponent * s.abs().powf(exponent - 1.0)
                } else {
                    slope
                }
            }
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, FeedbackKind::Linear { .. })
    }

    /// `K0 = 1/k + K`.
    pub fn k0(&self) -> f64 {
        1.0 / self.k_low + self.k_high
    }

    /// Checks the structural assumptions on a grid of 10⁴ points in `[-10, 10]`.
    pub fn verify(&self) -> Result<(), DynamicsError> {
        const N: usize = 10_000;
        let grid: Vec<f64> = (0..N).map(|i| -10.0 + 20.0 * i as f64 / (N - 1) as f64).collect();
        if self.eval(0.0) != 0.0 {
            return Err(DynamicsError::InvalidFeedback("g(0) ≠ 0".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for &s in &grid {
            let g = self.eval(s);
            if !g.is_finite() || g < prev {
                return Err(DynamicsError::InvalidFeedback(format!("not nondecreasing at s = {s}")));
            }
            prev = g;
            if s != 0.0 && !(g * s > 0.0) {
                return Err(DynamicsError::InvalidFeedback(format!("g(s)s ≤ 0 at s = {s}")));
            }
            if s.abs() > 1.0 {
                let tol = 1e-12 * s.abs();
                if g.abs() < self.k_low * s.abs() - tol || g.abs() > self.k_high * s.abs() + tol {
                    return Err(DynamicsError::InvalidFeedback(format!(
                        "linear growth bounds violated at s = {s}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builds and verifies a feedback law; `(k_low, k_high)` follow from the construction.
pub fn make_feedback(kind: FeedbackKind) -> Result<FeedbackLaw, DynamicsError> {
    let (k_low, k_high) = match kind {
        FeedbackKind::Linear { slope } => {
            if !(slope > 0.0) || !slope.is_finite() {
                return Err(DynamicsError::InvalidFeedback(format!("slope must be > 0, got {slope}")));
            }
            (slope, slope)
        }
        FeedbackKind::Power { exponent } => {
            if !(exponent > 1.0) || !exponent.is_finite() {
                return Err(DynamicsError::InvalidFeedback(format!("exponent must be > 1, got {exponent}")));
            }
            (1.0, 1.0)
        }
        FeedbackKind::SaturatedPower { exponent, slope } => {
            if !(exponent > 1.0) || !(slope > 0.0) || !exponent.is_finite() || !slope.is_finite() {
                return Err(DynamicsError::InvalidFeedback(format!(
                    "need exponent > 1 and slope > 0, got {exponent}, {slope}"
                )));
            }
            // g(s)/s = (1 + slope (s - 1)) / s moves monotonically from 1 towards slope
            (slope.min(1.0), slope.max(1.0))
        }
    };
    let law = FeedbackLaw { kind, k_low, k_high };
    law.verify()?;
    Ok(law)
}

impl fmt::Display for FeedbackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear { slope } => write!(f, "linear:{slope:?}"),
            Self::Power { exponent } => write!(f, "power:{exponent:?}"),
            Self::SaturatedPower { exponent, slope } => write!(f, "saturated:{exponent:?}:{slope:?}"),
        }
    }
}

/// Parses `linear[:slope]`, `power:p` or `saturated:p:slope`.
impl FromStr for FeedbackKind {
    type Err = DynamicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<f64, DynamicsError> {
            parts
                .get(i)
                .ok_or_else(|| DynamicsError::InvalidFeedback(format!("missing parameter in '{s}'")))?
                .parse()
                .map_err(|_| DynamicsError::InvalidFeedback(format!("bad number in '{s}'")))
        };
        match (parts[0], parts.len()) {
            ("linear", 1) => Ok(Self::Linear { slope: 1.0 }),
            ("linear", 2) => Ok(Self::Linear { slope: num(1)? }),
            ("power", 2) => Ok(Self::Power { exponent: num(1)? }),
            ("saturated", 3) => Ok(Self::SaturatedPower {
                exponent: num(1)?,
                slope: num(2)?,
            }),
            _ => Err(DynamicsError::InvalidFeedback(format!("unknown feedback spec '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_identity() {
        let g = make_feedback(FeedbackKind::Linear { slope: 1.0 }).unwrap();
        assert_eq!(g.eval(2.0), 2.0);
        assert_eq!((g.k_low, g.k_high), (1.0, 1.0));
    }

    #[test]
    fn cubic_values_and_continuity() {
        let g = make_feedback(FeedbackKind::Power { exponent: 3.0 }).unwrap();
        assert_eq!(g.eval(0.5), 0.125);
        assert_eq!(g.eval(-0.5), -0.125);
        assert_eq!(g.eval(1.0), 1.0);
        assert!((g.eval(1.0 + 1e-12) - 1.0).abs() < 1e-11);
        assert!((g.eval(1.0 - 1e-12) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn cubic_growth_constants_by_scan() {
        let g = make_feedback(FeedbackKind::Power { exponent: 3.0 }).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 1..=9000 {
            let s = 1.0 + i as f64 / 1000.0;
            for s in [s, -s] {
                let r = g.eval(s) / s;
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        assert_eq!((lo, hi), (1.0, 1.0));
        assert_eq!((g.k_low, g.k_high), (1.0, 1.0));
    }

    #[test]
    fn saturated_constants() {
        let g = make_feedback(FeedbackKind::SaturatedPower { exponent: 2.0, slope: 3.0 }).unwrap();
        assert_eq!((g.k_low, g.k_high), (1.0, 3.0));
        assert_eq!(g.eval(2.0), 4.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_feedback(FeedbackKind::Linear { slope: 0.0 }).is_err());
        assert!(make_feedback(FeedbackKind::Power { exponent: 1.0 }).is_err());
        assert!(make_feedback(FeedbackKind::SaturatedPower { exponent: 3.0, slope: -1.0 }).is_err());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let g = make_feedback(FeedbackKind::Power { exponent: 3.0 }).unwrap();
        for s in [-0.7, -0.2, 0.1, 0.9, 1.5, -4.0] {
            let fd = (g.eval(s + 1e-7) - g.eval(s - 1e-7)) / 2e-7;
            assert!((fd - g.derivative(s)).abs() < 1e-6);
        }
    }

    #[test]
    fn parse_round_trip() {
        for spec in ["linear", "linear:2.5", "power:3", "saturated:3:0.5"] {
            let k: FeedbackKind = spec.parse().unwrap();
            let again: FeedbackKind = k.to_string().parse().unwrap();
            assert_eq!(k, again);
        }
        assert!("cubic".parse::<FeedbackKind>().is_err());
    }
}

use super::DecayError;

const BISECTION_TOL: f64 = 1e-12;

/// A strictly increasing function on `[0, ∞)` given by a closed form, a tabulation, or one of
/// the inversions used by the decay chain.
#[derive(Clone, Debug, PartialEq)]
pub enum MonotoneFn {
    /// `slope · x`.
    Linear { slope: f64 },
    /// `coef · x^exponent`.
    Power { coef: f64, exponent: f64 },
    /// Piecewise linear through `(xs, ys)` (`xs[0] = 0`), extended past the last knot with the
    /// last slope.
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
    /// `inner(x / scale)`.
    Rescaled { inner: Box<MonotoneFn>, scale: f64 },
    /// `(c I + inner)⁻¹(l x)`.
    ShiftedInverse { c: f64, inner: Box<MonotoneFn>, l: f64 },
    /// `(I + (c I + inner)/l)⁻¹(x)`, which equals `x − (I + p)⁻¹(x)` for
    /// `p = ShiftedInverse { c, inner, l }`.
    Resolvent { c: f64, inner: Box<MonotoneFn>, l: f64 },
}

impl MonotoneFn {
    /// Evaluates at `x`; negative arguments are clamped to 0.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self {
            Self::Linear { slope } => slope * x,
            Self::Power { coef, exponent } => coef * x.powf(*exponent),
            Self::Tabulated { xs, ys } => interpolate(xs, ys, x),
            Self::Rescaled { inner, scale } => inner.eval(x / scale),
            Self::ShiftedInverse { c, inner, l } => {
                invert_increasing(|y| c * y + inner.eval(y), l * x).unwrap_or(f64::NAN)
            }
            Self::Resolvent { c, inner, l } => {
                invert_increasing(|z| z + (c * z + inner.eval(z)) / l, x).unwrap_or(f64::NAN)
            }
        }
    }

    /// Samples `n` points of `[0, x_max]` and checks strict increase and `f(0) = 0`.
    pub fn check_increasing(&self, x_max: f64, n: usize) -> Result<(), DecayError> {
        if self.eval(0.0) != 0.0 {
            return Err(DecayError::NotMonotone(format!("f(0) = {} ≠ 0", self.eval(0.0))));
        }
        let mut prev = 0.0;
        for i in 1..n {
            let x = x_max * i as f64 / (n - 1) as f64;
            let y = self.eval(x);
            if !(y > prev) {
                return Err(DecayError::NotMonotone(format!("not strictly increasing at x = {x}")));
            }
            prev = y;
        }
        Ok(())
    }

    /// Tabulates on `n` uniform points of `[0, x_max]`.
    pub fn tabulate(&self, x_max: f64, n: usize) -> Self {
        let xs: Vec<f64> = (0..n).map(|i| x_max * i as f64 / (n - 1) as f64).collect();
        let ys = xs.iter().map(|&x| self.eval(x)).collect();
        Self::Tabulated { xs, ys }
    }

    /// Slope when the function is linear (possibly through rescaling/inversion), else `None`.
    pub fn linear_slope(&self) -> Option<f64> {
        match self {
            Self::Linear { slope } => Some(*slope),
            Self::Power { coef, exponent } if *exponent == 1.0 => Some(*coef),
            Self::Rescaled { inner, scale } => inner.linear_slope().map(|s| s / scale),
            Self::ShiftedInverse { c, inner, l } => inner.linear_slope().map(|s| l / (c + s)),
            Self::Resolvent { c, inner, l } => inner.linear_slope().map(|s| l / (l + c + s)),
            _ => None,
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let k = match xs.partition_point(|&t| t <= x) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    };
    let slope = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
    ys[k] + slope * (x - xs[k])
}

/// Solves `f(y) = target` for an increasing `f` with `f(0) = 0`, by bracket doubling and
/// bisection to `1e-12` absolute (relative below 1, and never past floating-point resolution).
pub fn invert_increasing(f: impl Fn(f64) -> f64, target: f64) -> Result<f64, DecayError> {
    if target <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut grow = 0;
    while f(hi) < target {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 2000 || !hi.is_finite() {
            return Err(DecayError::Bracket(target));
        }
    }
    // absolute tolerance, tightened to relative for solutions below 1
    while hi - lo > BISECTION_TOL * hi.min(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

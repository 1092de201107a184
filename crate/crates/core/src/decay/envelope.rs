use super::{DecayError, MonotoneFn};

/// Samples of the comparison solution `S' = −q(S)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeCurve {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
}

impl EnvelopeCurve {
    /// Linear interpolation; clamps to the first/last sample outside the range.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.s[0];
        }
        if t >= self.t[n - 1] {
            return self.s[n - 1];
        }
        let k = self.t.partition_point(|&x| x <= t) - 1;
        let w = (t - self.t[k]) / (self.t[k + 1] - self.t[k]);
        self.s[k] + w * (self.s[k + 1] - self.s[k])
    }

    pub fn t_max(&self) -> f64 {
        *self.t.last().unwrap()
    }
}

/// Classical RK4 for `S' = −q(S)`, `S(0) = s0`, clipped at 0 and forced nonincreasing.
pub fn solve_envelope(q: &MonotoneFn, s0: f64, t_max: f64, dt_ode: f64) -> Result<EnvelopeCurve, DecayError> {
    if !(s0 >= 0.0) || !(t_max >= 0.0) || !(dt_ode > 0.0) {
        return Err(DecayError::InvalidParameter(format!(
            "need S0 ≥ 0, t_max ≥ 0, dt > 0; got {s0}, {t_max}, {dt_ode}"
        )));
    }
    let steps = (t_max / dt_ode).ceil() as usize;
    let mut t = Vec::with_capacity(steps + 1);
    let mut s = Vec::with_capacity(steps + 1);
    t.push(0.0);
    s.push(s0);
    let mut y = s0;
    let f = |x: f64| -q.eval(x.max(0.0));
    for k in 1..=steps {
        let h = (t_max - (k - 1) as f64 * dt_ode).min(dt_ode);
        if y > 0.0 {
            let k1 = f(y);
            let k2 = f(y + 0.5 * h * k1);
            let k3 = f(y + 0.5 * h * k2);
            let k4 = f(y + h * k3);
            let next = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            y = next.clamp(0.0, y);
        }
        t.push(if k == steps { t_max } else { k as f64 * dt_ode });
        s.push(y);
    }
    Ok(EnvelopeCurve { t, s })
}

/// The two closed-form decay laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedForm {
    /// `C e^{−k t} E0`.
    Exponential { c: f64, k: f64 },
    /// `C [E0^{(1−p)/2} + t (p − 1)]^{2/(1−p)}`.
    Polynomial { c: f64, p: f64 },
}

impl ClosedForm {
    pub fn new_polynomial(c: f64, p: f64) -> Result<Self, DecayError> {
        if !(p > 1.0) {
            return Err(DecayError::InvalidParameter(format!("polynomial bound needs p > 1, got {p}")));
        }
        Ok(Self::Polynomial { c, p })
    }

    pub fn eval(&self, t: f64, e0: f64) -> f64 {
        match *self {
            Self::Exponential { c, k } => c * (-k * t).exp() * e0,
            Self::Polynomial { c, p } => {
                let e = (1.0 - p) / 2.0;
                c * (e0.powf(e) + t * (p - 1.0)).powf(1.0 / e)
            }
        }
    }
}

/// `t ↦ bound(t)` for the given law and initial energy.
pub fn closed_form_envelope(kind: ClosedForm, e0: f64) -> Result<impl Fn(f64) -> f64, DecayError> {
    if let ClosedForm::Polynomial { p, .. } = kind {
        if !(p > 1.0) {
            return Err(DecayError::InvalidParameter(format!("polynomial bound needs p > 1, got {p}")));
        }
    }
    Ok(move |t| kind.eval(t, e0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_reference() {
        let q = MonotoneFn::Linear { slope: 0.5 };
        let c = solve_envelope(&q, 1.0, 10.0, 1e-3).unwrap();
        let err = c
            .t
            .iter()
            .zip(&c.s)
            .fold(0.0f64, |m, (t, s)| m.max((s - (-t / 2.0).exp()).abs()));
        assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn quadratic_reference() {
        let q = MonotoneFn::Power { coef: 1.0, exponent: 2.0 };
        let c = solve_envelope(&q, 1.0, 10.0, 1e-3).unwrap();
        for (t, s) in c.t.iter().zip(&c.s) {
            assert!((s - 1.0 / (1.0 + t)).abs() <= 1e-8);
        }
        assert!((c.at(1.0) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn zero_q_is_constant() {
        let q = MonotoneFn::Linear { slope: 0.0 };
        let c = solve_envelope(&q, 3.0, 2.0, 0.1).unwrap();
        assert!(c.s.iter().all(|&s| s == 3.0));
    }

    #[test]
    fn larger_start_dominates() {
        let q = MonotoneFn::Power { coef: 1.0, exponent: 1.5 };
        let a = solve_envelope(&q, 1.0, 5.0, 1e-2).unwrap();
        let b = solve_envelope(&q, 1.3, 5.0, 1e-2).unwrap();
        assert!(a.s.iter().zip(&b.s).all(|(x, y)| x <= y));
        assert!(a.s.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn closed_forms() {
        let lin = closed_form_envelope(ClosedForm::Exponential { c: 1.0, k: 0.5 }, 4.0).unwrap();
        assert!((lin(2.0) - 4.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((lin(2.0) - 1.4715).abs() < 1e-4);
        let poly = closed_form_envelope(ClosedForm::Polynomial { c: 1.0, p: 3.0 }, 1.0).unwrap();
        assert_eq!(poly(0.5), 0.5);
        for t in [0.0, 0.3, 2.0, 7.5] {
            assert!((poly(t) - 1.0 / (1.0 + 2.0 * t)).abs() < 1e-15);
        }
        let poly2 = closed_form_envelope(ClosedForm::Polynomial { c: 2.0, p: 5.0 }, 0.7).unwrap();
        assert!((poly2(0.0) - 1.4).abs() < 1e-14);
        assert!(closed_form_envelope(ClosedForm::Polynomial { c: 1.0, p: 1.0 }, 1.0).is_err());
    }
}

use super::{solve_envelope, DecayChain, DecayError, EnvelopeCurve};
use crate::format::num;
use std::fmt;

/// ODE step for envelopes, in units of the period `T0`.
pub const ENVELOPE_DT: f64 = 1e-3;
const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CertificationReport {
    /// Some `L > 0` makes `s_{m+1} + p_L(s_{m+1}) ≤ s_m` hold for every `m`.
    pub sequence_ok: bool,
    /// `E(t) ≤ S_L(t/T0 − 1)(1 + 1e-9)` at every sample with `t > T0`.
    pub envelope_ok: bool,
    pub fitted_l: f64,
    pub t0: f64,
    pub periods: usize,
    /// `s_m = E(m T0)`.
    pub sequence: Vec<f64>,
    /// `S_L(m)` for the same `m`.
    pub envelope_at_periods: Vec<f64>,
    /// `max E(t) / S_L(t/T0 − 1)` over samples with `t > T0`.
    pub max_envelope_ratio: f64,
    /// `s_m ≤ S_L(m) + 1e-12` for all `m`.
    pub comparison_ok: bool,
    pub c: f64,
    pub k0: f64,
    pub meas_sigma: f64,
    pub a_inf: f64,
}

impl fmt::Display for CertificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sequence_ok = {}", self.sequence_ok)?;
        writeln!(f, "envelope_ok = {}", self.envelope_ok)?;
        writeln!(f, "comparison_ok = {}", self.comparison_ok)?;
        writeln!(f, "fitted_L = {}", num(self.fitted_l))?;
        writeln!(f, "T0 = {}", num(self.t0))?;
        writeln!(f, "periods = {}", self.periods)?;
        writeln!(f, "c = {}", num(self.c))?;
        writeln!(f, "K0 = {}", num(self.k0))?;
        writeln!(f, "meas_sigma = {}", num(self.meas_sigma))?;
        writeln!(f, "a_inf = {}", num(self.a_inf))?;
        writeln!(f, "max_envelope_ratio = {}", num(self.max_envelope_ratio))?;
        let join = |v: &[f64]| v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ");
        writeln!(f, "sequence = {}", join(&self.sequence))?;
        writeln!(f, "envelope_at_periods = {}", join(&self.envelope_at_periods))
    }
}

/// Linear interpolation of the sampled energy at `t`.
fn energy_at(times: &[f64], energy: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&x| x <= t);
    if k == 0 {
        return energy[0];
    }
    if k >= times.len() {
        return energy[times.len() - 1];
    }
    let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    energy[k - 1] + w * (energy[k] - energy[k - 1])
}

/// Largest `L` with `s_{m+1} + p_L(s_{m+1}) ≤ s_m` for all `m`.
///
/// Since `p_L(x) ≤ d ⟺ L x ≤ c d + r(d)`, each step bounds `L` by `(c d_m + r(d_m)) / s_{m+1}`
/// with `d_m = s_m − s_{m+1}`; the minimum is taken, shaved by `1e-6` relative so that the
/// bisection-evaluated `p_L` passes the check. `None` when no positive `L` works; `l_cap` when
/// the sequence reaches zero and leaves `L` unconstrained.
pub fn fit_l(sequence: &[f64], chain: &DecayChain, l_cap: f64) -> Option<f64> {
    let mut best = l_cap;
    for w in sequence.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s1 <= 0.0 {
            continue;
        }
        let d = s0 - s1;
        if !(d > 0.0) {
            return None;
        }
        best = best.min(chain.c_plus_r(d) / s1);
    }
    (best > 0.0).then_some(best * (1.0 - 1e-6))
}

/// Direct check of the discrete comparison hypothesis `s_{m+1} + p(s_{m+1}) ≤ s_m` for a given chain.
pub fn sequence_condition(sequence: &[f64], chain: &DecayChain) -> bool {
    sequence
        .windows(2)
        .all(|w| w[1] + chain.p.eval(w[1]) <= w[0])
}

/// Conclusion of the discrete comparison lemma: `s_m ≤ S(m) + 1e-12` with `S' = −q(S)`, `S(0) = s_0`.
pub fn discrete_comparison(sequence: &[f64], chain: &DecayChain) -> Result<(bool, EnvelopeCurve), DecayError> {
    let m = sequence.len().saturating_sub(1) as f64;
    let curve = solve_envelope(&chain.q, sequence[0], m.max(ENVELOPE_DT), ENVELOPE_DT)?;
    let ok = sequence
        .iter()
        .enumerate()
        .all(|(i, &s)| s <= curve.at(i as f64) + 1e-12);
    Ok((ok, curve))
}

/// Result of [`certify_samples`]: the report plus the envelope curve (in units of `T0`).
pub struct Certification {
    pub report: CertificationReport,
    pub chain: Option<DecayChain>,
    pub curve: Option<EnvelopeCurve>,
}

impl Certification {
    /// `S(t/T0 − 1)`, with `S(0)` for `t ≤ T0`; `None` when certification produced no chain.
    pub fn envelope_at(&self, t: f64) -> Option<f64> {
        let c = self.curve.as_ref()?;
        Some(c.at((t / self.report.t0 - 1.0).max(0.0)))
    }
}

/// Certifies sampled energies against the decay chain (whose `L` is refitted).
pub fn certify_samples(
    times: &[f64],
    energy: &[f64],
    chain: &DecayChain,
    t0: f64,
) -> Result<Certification, DecayError> {
    if !(t0 > 0.0) {
        return Err(DecayError::InvalidParameter(format!("T0 must be > 0, got {t0}")));
    }
    let t_end = *times.last().ok_or(DecayError::TooShort { periods: 0 })?;
    let periods = ((t_end / t0) * (1.0 + 1e-12)).floor() as usize;
    if periods < 3 {
        return Err(DecayError::TooShort { periods });
    }
    let sequence: Vec<f64> = (0..=periods)
        .map(|m| energy_at(times, energy, m as f64 * t0))
        .collect();
    let mut report = CertificationReport {
        sequence_ok: false,
        envelope_ok: false,
        fitted_l: 0.0,
        t0,
        periods,
        sequence: sequence.clone(),
        envelope_at_periods: Vec::new(),
        max_envelope_ratio: f64::INFINITY,
        comparison_ok: false,
        c: chain.c,
        k0: chain.k0,
        meas_sigma: chain.meas_sigma,
        a_inf: chain.a_inf,
    };
    let Some(l) = fit_l(&sequence, chain, 1e6) else {
        return Ok(Certification {
            report,
            chain: None,
            curve: None,
        });
    };
    let fitted = chain.with_l(l)?;
    report.fitted_l = l;
    report.sequence_ok = sequence_condition(&sequence, &fitted);
    let tau_max = t_end / t0 - 1.0;
    let curve = solve_envelope(&fitted.q, sequence[0], tau_max.max(periods as f64), ENVELOPE_DT)?;
    report.envelope_at_periods = (0..=periods).map(|m| curve.at(m as f64)).collect();
    report.comparison_ok = sequence
        .iter()
        .zip(&report.envelope_at_periods)
        .all(|(s, e)| *s <= e + 1e-12);
    let mut ok = true;
    let mut ratio: f64 = 0.0;
    for (&t, &e) in times.iter().zip(energy) {
        if t <= t0 {
            continue;
        }
        let bound = curve.at(t / t0 - 1.0);
        if e > bound * (1.0 + ENVELOPE_SLACK) {
            ok = false;
        }
        ratio = ratio.max(if bound > 0.0 { e / bound } else if e > 0.0 { f64::INFINITY } else { 0.0 });
    }
    report.envelope_ok = report.sequence_ok && ok;
    report.max_envelope_ratio = ratio;
    Ok(Certification {
        report,
        chain: Some(fitted),
        curve: Some(curve),
    })
}

//! MRC receiver performance: outage probability, outage capacity and average
//! bit error rate for coherent binary modulation.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::channel::{ln_small_snr_constant, Modulation};
use crate::oracles::quadrature::gauss_legendre;
use crate::specfun::{ln_gamma, meijer_g_ber, CompensatedSum, Estimate, SeriesOptions};
use crate::sumdist::{cdf_sum, EvalOptions, SumChannel, SumEstimate};
use crate::{db_to_linear, Error, Result};

/// Threshold capacity and bandwidth for the outage-capacity metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitySpec {
    /// Threshold capacity, bits/s.
    pub c_th: f64,
    /// Bandwidth, Hz.
    pub w: f64,
}

impl CapacitySpec {
    pub fn new(c_th: f64, w: f64) -> Result<Self> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidParameter {
                name: "w",
                value: w,
                reason: "bandwidth must be positive",
            });
        }
        if !(c_th >= 0.0) || !c_th.is_finite() {
            return Err(Error::InvalidParameter {
                name: "c_th",
                value: c_th,
                reason: "threshold capacity must be non-negative",
            });
        }
        Ok(CapacitySpec { c_th, w })
    }

    /// SNR threshold `2^{C_th/W} - 1`.
    pub fn snr_threshold(&self) -> f64 {
        (self.c_th / self.w * std::f64::consts::LN_2).exp_m1()
    }
}

/// `P[γ < γ_th]`.
pub fn outage_probability(
    ch: &SumChannel,
    gamma_th: f64,
    opts: &EvalOptions,
) -> Result<SumEstimate> {
    cdf_sum(ch, gamma_th, opts)
}

/// Leading small-`γ_th` (high-SNR) term of the outage probability,
/// `γ_th^M / Γ(1+M) ∏ θ_ℓ^{-m_ℓ} Γ(m_ℓ+m_sℓ)/Γ(m_sℓ)` with `M = Σ m_ℓ`.
pub fn outage_probability_asymptotic(ch: &SumChannel, gamma_th: f64) -> Result<f64> {
    if !(gamma_th > 0.0) {
        return Err(Error::domain(
            "outage_probability_asymptotic",
            "gamma_th must be positive",
        ));
    }
    let total = ch.total_m();
    let ln_c: f64 = ch.branches().iter().map(ln_small_snr_constant).sum();
    Ok((total * gamma_th.ln() - ln_gamma(1.0 + total) + ln_c).exp())
}

/// Analytic diversity order `Σ m_ℓ`.
pub fn diversity_gain(ch: &SumChannel) -> f64 {
    ch.total_m()
}

/// Least-squares slope of `log10 y` against `x_db / 10`.
pub fn fit_log_log_slope(x_db: &[f64], y: &[f64]) -> Result<f64> {
    if x_db.len() != y.len() || x_db.len() < 2 {
        return Err(Error::Length(
            "slope fit needs at least two matching points".into(),
        ));
    }
    if y.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::domain(
            "fit_log_log_slope",
            "values must be positive",
        ));
    }
    let n = x_db.len() as f64;
    let xs: Vec<f64> = x_db.iter().map(|x| x / 10.0).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Empirical diversity order: minus the fitted log-log slope of `metric` when
/// every branch mean-SNR scale is multiplied by `10^{d/10}` for `d` on an
/// even grid over `[from_db, to_db]`.
pub fn empirical_diversity<F>(
    ch: &SumChannel,
    from_db: f64,
    to_db: f64,
    points: usize,
    metric: F,
) -> Result<f64>
where
    F: Fn(&SumChannel) -> Result<f64>,
{
    if points < 2 || !(to_db > from_db) {
        return Err(Error::domain(
            "empirical_diversity",
            "need an increasing range and ≥ 2 points",
        ));
    }
    let step = (to_db - from_db) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|k| from_db + k as f64 * step).collect();
    let ys = xs
        .iter()
        .map(|&d| metric(&ch.scaled(db_to_linear(d))))
        .collect::<Result<Vec<f64>>>()?;
    Ok(-fit_log_log_slope(&xs, &ys)?)
}

/// `P[W log₂(1+γ) < C_th]`.
pub fn outage_capacity(
    ch: &SumChannel,
    spec: &CapacitySpec,
    opts: &EvalOptions,
) -> Result<SumEstimate> {
    cdf_sum(ch, spec.snr_threshold(), opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BerMethod {
    ClosedForm,
    Quadrature,
    Asymptotic,
}

impl BerMethod {
    pub fn label(&self) -> &'static str {
        match self {
            BerMethod::ClosedForm => "closed_form",
            BerMethod::Quadrature => "quadrature",
            BerMethod::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerResult {
    pub value: f64,
    pub method: BerMethod,
    pub estimate: Estimate,
    /// For the closed form with `L > 1`: `(closed − quadrature)/quadrature`.
    pub gap: Option<f64>,
}

impl BerResult {
    /// Whether the value is a valid coherent-binary error probability.
    pub fn in_range(&self) -> bool {
        (0.0..=0.5).contains(&self.value)
    }
}

fn check_modulation(m: &Modulation) -> Result<()> {
    if m.lambda > 0.0 && m.lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "lambda",
            value: m.lambda,
            reason: "must be positive",
        })
    }
}

/// Smallest and largest Gauss–Legendre rule tried by [`ber_quadrature`].
const GL_START: usize = 32;
const GL_MAX: usize = 4096;
const GL_STAGNATION: f64 = 1e-9;

fn ber_integrand_rule(
    ch: &SumChannel,
    lambda: f64,
    n: usize,
    opts: &SeriesOptions,
) -> Result<(f64, bool, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * FRAC_PI_2;
    let mut acc = CompensatedSum::new();
    let mut ok = true;
    let mut rel = 0.0f64;
    for (xi, wi) in x.iter().zip(&w) {
        let phi = half * (1.0 + xi);
        let s = phi.sin();
        let t = lambda / (s * s);
        let mut prod = Estimate::exact(1.0);
        for b in ch.branches() {
            prod = prod.mul(b.mgf_with(t, opts)?);
            if prod.value == 0.0 {
                break;
            }
        }
        ok &= prod.converged;
        if prod.value != 0.0 {
            rel = rel.max(prod.rel_err());
        }
        acc.add(wi * prod.value);
    }
    Ok((acc.value() * half / PI, ok, rel))
}

/// Reference average BER `(1/π) ∫₀^{π/2} ∏_ℓ M_ℓ(λ/sin²φ) dφ`, by
/// Gauss–Legendre rules doubled from 32 nodes until successive values agree
/// to `1e-9` relative.
pub fn ber_quadrature(
    ch: &SumChannel,
    modulation: &Modulation,
    opts: &SeriesOptions,
) -> Result<BerResult> {
    check_modulation(modulation)?;
    let lambda = modulation.lambda;
    let mut n = GL_START;
    let (mut prev, mut ok, mut rel) = ber_integrand_rule(ch, lambda, n, opts)?;
    let mut terms = n;
    loop {
        n *= 2;
        let (cur, ok2, rel2) = ber_integrand_rule(ch, lambda, n, opts)?;
        terms += n;
        ok &= ok2;
        rel = rel.max(rel2);
        let diff = (cur - prev).abs();
        let done = diff <= GL_STAGNATION * cur.abs();
        if done || n >= GL_MAX {
            let est = Estimate::new(cur, diff + rel * cur.abs(), terms, ok && done);
            return Ok(BerResult {
                value: cur,
                method: BerMethod::Quadrature,
                estimate: est,
                gap: None,
            });
        }
        prev = cur;
    }
}

/// Product of per-branch Meijer-G closed forms with a single `1/(2√π)`
/// prefactor.
///
/// For one branch this is the exact average BER. For several branches the
/// product of per-branch factors does not equal the quadrature of the
/// product of MGFs (it tends to `(√π)^{L-1}/2` at zero SNR), so the result
/// carries the relative gap to [`ber_quadrature`] and may exceed ½.
pub fn ber_closed_form(
    ch: &SumChannel,
    modulation: &Modulation,
    opts: &SeriesOptions,
) -> Result<BerResult> {
    check_modulation(modulation)?;
    let mut prod = Estimate::exact(0.5 / PI.sqrt());
    for b in ch.branches() {
        let z = b.m / (modulation.lambda * b.m_s * b.gamma_bar);
        prod = prod.mul(meijer_g_ber(b.m, b.m_s, z, opts)?);
    }
    let gap = if ch.len() > 1 {
        let q = ber_quadrature(ch, modulation, opts)?;
        Some((prod.value - q.value) / q.value)
    } else {
        None
    };
    Ok(BerResult {
        value: prod.value,
        method: BerMethod::ClosedForm,
        estimate: prod,
        gap,
    })
}

/// High-SNR leading term
/// `(1/(2√π)) ∏ (m/(λ m_s γ̄))^m Γ(m+m_s)Γ(½+m) / (Γ(m_s)Γ(1+m))`.
pub fn ber_asymptotic(ch: &SumChannel, modulation: &Modulation) -> Result<f64> {
    check_modulation(modulation)?;
    let mut ln = -(2.0 * PI.sqrt()).ln();
    for b in ch.branches() {
        ln += b.m * (b.m / (modulation.lambda * b.m_s * b.gamma_bar)).ln()
            + ln_gamma(b.m + b.m_s)
            + ln_gamma(0.5 + b.m)
            - ln_gamma(b.m_s)
            - ln_gamma(1.0 + b.m);
    }
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::BranchParams;

    fn single(m: f64, ms: f64, g: f64) -> SumChannel {
        SumChannel::new(vec![BranchParams::new(m, ms, g).unwrap()]).unwrap()
    }

    #[test]
    fn capacity_threshold() {
        assert_eq!(CapacitySpec::new(0.0, 1.0).unwrap().snr_threshold(), 0.0);
        assert!((CapacitySpec::new(2.0, 1.0).unwrap().snr_threshold() - 3.0).abs() < 1e-14);
        assert!(CapacitySpec::new(1.0, 0.0).is_err());
        assert!(CapacitySpec::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn unit_case_outage() {
        let ch = single(1.0, 1.0, 1.0);
        let o = EvalOptions::default();
        assert!((outage_probability(&ch, 1.0, &o).unwrap().value() - 0.5).abs() < 1e-14);
        assert_eq!(outage_probability(&ch, 0.0, &o).unwrap().value(), 0.0);
        // P_out ≈ γ_th/γ̄ for m = m_s = 1
        let hi = single(1.0, 1.0, 1e4);
        assert!((outage_probability_asymptotic(&hi, 1.0).unwrap() - 1e-4).abs() < 1e-16);
    }

    #[test]
    fn asymptotic_ber_unit_fading() {
        for &ms in &[0.5, 1.0, 7.0] {
            let ch = single(1.0, ms, 200.0);
            let v = ber_asymptotic(&ch, &Modulation::BPSK).unwrap();
            assert!((v - 1.0 / 800.0).abs() < 1e-15, "m_s = {ms}");
        }
    }

    #[test]
    fn slope_fit() {
        let xs = [0.0, 10.0, 20.0];
        let ys = [1.0, 1e-3, 1e-6];
        assert!((fit_log_log_slope(&xs, &ys).unwrap() + 3.0).abs() < 1e-12);
        assert!(fit_log_log_slope(&xs, &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn quadrature_rayleigh_limit() {
        let g = 10.0;
        let ch = single(1.0, 1e5, g);
        let q = ber_quadrature(&ch, &Modulation::BPSK, &SeriesOptions::default()).unwrap();
        let rayleigh = 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
        assert!((q.value - rayleigh).abs() < 1e-3 * rayleigh);
        assert!(q.in_range());
    }

    #[test]
    fn closed_form_matches_quadrature_single_branch() {
        let o = SeriesOptions::default();
        for &(m, ms, g, lam) in &[
            (1.0, 1.0, 1.0, 1.0),
            (2.5, 1.5, 10.0, 0.5),
            (0.7, 5.0, 3.0, 0.715),
        ] {
            let ch = single(m, ms, g);
            let m0 = Modulation::custom(lam).unwrap();
            let c = ber_closed_form(&ch, &m0, &o).unwrap();
            let q = ber_quadrature(&ch, &m0, &o).unwrap();
            assert!(
                (c.value - q.value).abs() <= 1e-8 * q.value,
                "{m} {ms} {g}: {} vs {}",
                c.value,
                q.value
            );
            assert!(c.gap.is_none());
        }
    }
}

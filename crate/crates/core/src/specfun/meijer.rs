//! The two fixed Meijer-G instances behind the single-branch MGF and BER.
//!
//! Both are returned divided by `Γ(m)Γ(m_s)`, which keeps them O(1) for
//! large shadowing shapes where the raw G values overflow.

use num_complex::Complex64;

use super::gamma::{ln_gamma, ln_gamma_complex};
use super::tricomi::tricomi_u;
use super::{CompensatedSum, Estimate, SeriesOptions};
use crate::{Error, Result};

fn check(func: &'static str, m: f64, ms: f64, z: f64) -> Result<()> {
    for (name, v) in [("m", m), ("m_s", ms), ("z", z)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain(
                func,
                format!("{name} = {v} must be positive and finite"),
            ));
        }
    }
    Ok(())
}

/// `G_{2,1}^{1,2}[z | 1-m_s, 1; m] / (Γ(m)Γ(m_s))`, which is the F-fading MGF at
/// `t = m/(m_s γ̄ z)`. Evaluated as `Γ(m+m_s)/Γ(m_s) · U(m, 1-m_s, 1/z)`.
pub fn meijer_g_mgf(m: f64, ms: f64, z: f64, opts: &SeriesOptions) -> Result<Estimate> {
    check("meijer_g_mgf", m, ms, z)?;
    let u = tricomi_u(m, 1.0 - ms, 1.0 / z, opts)?;
    let ln_ratio = ln_gamma(m + ms) - ln_gamma(ms);
    let scale = ln_ratio.exp();
    let mut e = u.scale(scale);
    // rounding in the log-gamma difference
    e.err_bound += e.value.abs() * 4.0 * f64::EPSILON * (ln_gamma(m + ms).abs() + 1.0);
    Ok(e)
}

/// `G_{3,2}^{1,3}[z | ½, 1-m_s, 1; m, 0] / (Γ(m)Γ(m_s))`.
///
/// The residue series converges quickly for small `z` but is only asymptotic;
/// when its smallest term is not below tolerance the Mellin–Barnes integral is
/// evaluated numerically instead.
pub fn meijer_g_ber(m: f64, ms: f64, z: f64, opts: &SeriesOptions) -> Result<Estimate> {
    let r = meijer_g_ber_residues(m, ms, z, opts)?;
    if r.converged && r.rel_err() <= opts.rel_tol.max(1e-10) {
        return Ok(r);
    }
    let c = meijer_g_ber_contour(m, ms, z, opts)?;
    if !c.converged && r.converged && r.rel_err() < c.rel_err() {
        return Ok(r);
    }
    Ok(c)
}

/// Sum of residues at the poles `s = m + k` of `Γ(m - s)`, truncated at the
/// smallest term.
pub fn meijer_g_ber_residues(m: f64, ms: f64, z: f64, opts: &SeriesOptions) -> Result<Estimate> {
    check("meijer_g_ber_residues", m, ms, z)?;
    opts.validate()?;
    let ln_first =
        ln_gamma(0.5 + m) + ln_gamma(m + ms) - ln_gamma(m) - ln_gamma(ms) + m * z.ln() - m.ln();
    let mut term = ln_first.exp();
    let mut acc = CompensatedSum::new();
    acc.add(term);
    let cap = opts.max_order.max(64);
    for k in 0..cap {
        let kf = k as f64;
        let next =
            -term * (0.5 + m + kf) * (m + ms + kf) * z * (m + kf) / ((kf + 1.0) * (m + kf + 1.0));
        if next.abs() >= term.abs() {
            let err = next.abs() + acc.rounding_bound();
            let done = err <= opts.rel_tol.max(1e-15) * acc.value().abs();
            return Ok(Estimate::new(acc.value(), err, k + 1, done));
        }
        if next.abs() <= opts.rel_tol * acc.value().abs() || next == 0.0 {
            acc.add(next);
            let after = next * (1.5 + m + kf) * (m + ms + kf + 1.0) * z * (m + kf + 1.0)
                / ((kf + 2.0) * (m + kf + 2.0));
            return Ok(Estimate::new(
                acc.value(),
                after.abs() + acc.rounding_bound(),
                k + 2,
                true,
            ));
        }
        acc.add(next);
        term = next;
    }
    Ok(Estimate::new(acc.value(), term.abs(), cap, false))
}

/// Trapezoidal evaluation of the Mellin–Barnes integral along a vertical line
/// `Re s = c` between the pole at 0 and the pole at `m`.
///
/// The integrand is analytic in a strip of half-width `d` around the line, so
/// the trapezoid rule with step `h` has error of order `exp(-2πd/h)`; the
/// reported bound is the gap to the half-resolution sum.
pub fn meijer_g_ber_contour(m: f64, ms: f64, z: f64, opts: &SeriesOptions) -> Result<Estimate> {
    check("meijer_g_ber_contour", m, ms, z)?;
    let d = (0.5 * m).min(0.5);
    let c = if z < 1.0 { m - d } else { d };
    let h = d / 12.0;
    let ln_norm = -ln_gamma(m) - ln_gamma(ms);
    let ln_z = z.ln();
    let phi = |tau: f64| -> f64 {
        let s = Complex64::new(c, tau);
        let ln = ln_gamma_complex(Complex64::new(m, 0.0) - s)
            + ln_gamma_complex(s + 0.5)
            + ln_gamma_complex(s + ms)
            + s * ln_z
            - s.ln()
            + ln_norm;
        ln.exp().re
    };
    let mut fine = CompensatedSum::new();
    let mut coarse = CompensatedSum::new();
    let f0 = 0.5 * phi(0.0);
    fine.add(f0);
    coarse.add(f0);
    let mut peak = f0.abs();
    let mut quiet = 0usize;
    let mut k = 1usize;
    let max_steps = 4_000_000usize;
    // past the last stationary region the modulus decays like e^{-3π|τ|/2}
    let tau_floor = (m + ms + c + 2.0) / (1.5 * std::f64::consts::PI);
    loop {
        let tau = k as f64 * h;
        let v = phi(tau);
        fine.add(v);
        if k % 2 == 0 {
            coarse.add(v);
        }
        peak = peak.max(v.abs());
        if tau > tau_floor && v.abs() <= 1e-18 * peak.max(fine.value().abs()) {
            quiet += 1;
        } else {
            quiet = 0;
        }
        k += 1;
        if quiet >= 8 || !v.is_finite() || k >= max_steps {
            break;
        }
    }
    let value = fine.value() * h / std::f64::consts::PI;
    let coarse_value = coarse.value() * 2.0 * h / std::f64::consts::PI;
    let rounding =
        h / std::f64::consts::PI * (fine.rounding_bound() + 64.0 * f64::EPSILON * fine.abs_sum());
    let err = (value - coarse_value).abs() + rounding;
    let ok = quiet >= 8 && value.is_finite() && err <= opts.rel_tol.max(1e-10) * value.abs();
    Ok(Estimate::new(value, err, k, ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::quadrature::{adaptive_quadrature, QuadOptions};

    fn opts() -> SeriesOptions {
        SeriesOptions::default()
    }

    #[test]
    fn mgf_against_laplace_quadrature() {
        // m = m_s = γ̄ = 1: pdf (1+γ)^{-2}, z = 1/t
        let t = 1.0;
        let q = adaptive_quadrature(
            |g: f64| (-t * g).exp() / (1.0 + g).powi(2),
            0.0,
            f64::INFINITY,
            &QuadOptions::rel(1e-13),
        );
        let e = meijer_g_mgf(1.0, 1.0, 1.0 / t, &opts()).unwrap();
        assert!(
            (e.value - q.value).abs() < 1e-11,
            "{} vs {}",
            e.value,
            q.value
        );
    }

    #[test]
    fn mgf_nakagami_limit() {
        let (m, ms, gbar, t) = (2.0, 1e5, 1.0, 1.0);
        let z = m / (ms * gbar * t);
        let e = meijer_g_mgf(m, ms, z, &opts()).unwrap();
        let nak = (1.0f64 + gbar * t / m).powf(-m);
        assert!((e.value - nak).abs() < 1e-3);
    }

    #[test]
    fn ber_routes_agree_where_both_work() {
        for &(m, ms, z) in &[(1.0, 1.5, 0.004), (2.5, 5.0, 0.001), (0.7, 0.5, 0.005)] {
            let r = meijer_g_ber_residues(m, ms, z, &opts()).unwrap();
            let c = meijer_g_ber_contour(m, ms, z, &opts()).unwrap();
            assert!(r.converged && c.converged, "{m} {ms} {z}");
            assert!(
                (r.value - c.value).abs() <= 1e-9 * c.value.abs(),
                "{m} {ms} {z}: {} vs {}",
                r.value,
                c.value
            );
        }
    }

    #[test]
    fn residue_series_is_only_asymptotic() {
        // at moderate z the smallest term is far above tolerance
        let (m, ms, z) = (1.0, 1.5, 0.05);
        let r = meijer_g_ber_residues(m, ms, z, &opts()).unwrap();
        let c = meijer_g_ber_contour(m, ms, z, &opts()).unwrap();
        assert!(!r.converged);
        assert!((r.value - c.value).abs() <= r.err_bound);
        assert_eq!(meijer_g_ber(m, ms, z, &opts()).unwrap().value, c.value);
    }

    #[test]
    fn ber_zero_snr_limit() {
        // normalised G tends to √π as z → ∞
        for &(m, ms) in &[(1.0, 1.0), (2.5, 1.5), (0.5, 50.0)] {
            let e = meijer_g_ber(m, ms, 1e12, &opts()).unwrap();
            assert!(
                (e.value - std::f64::consts::PI.sqrt()).abs() < 1e-3,
                "{m} {ms}: {}",
                e.value
            );
        }
    }

    #[test]
    fn residue_leading_term() {
        // first residue dominates for tiny z
        let (m, ms, z) = (1.0, 3.0, 1e-9);
        let e = meijer_g_ber_residues(m, ms, z, &opts()).unwrap();
        let lead = (ln_gamma(1.5) + ln_gamma(4.0) - ln_gamma(3.0)).exp() * z;
        assert!((e.value - lead).abs() < 1e-7 * lead);
    }
}

//! Gamma family: log-gamma (real and complex), beta, Pochhammer.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::{Error, Result};

/// Natural log of `Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "log_gamma",
            format!("x = {x} must be positive and finite"),
        ));
    }
    Ok(ln_gamma(x))
}

/// Unchecked `ln Γ(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma called with x = {x}");
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    statrs::function::gamma::ln_gamma(x)
}

/// `sin(πx)` with exact argument reduction, so integers give exactly zero.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// `(ln|Γ(x)|, sign Γ(x))` for any real `x`. At the poles (non-positive
/// integers) returns `(+∞, 0)`, so `sign * exp(-ln)` is the reciprocal gamma.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (ln_gamma(x), 1.0);
    }
    if x == x.round() {
        return (f64::INFINITY, 0.0);
    }
    // reflection: Γ(x) Γ(1-x) = π / sin(πx)
    let s = sin_pi(x);
    let ln = PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    (ln, s.signum())
}

/// `Γ(x)` for real `x`; overflows to ±∞ and returns NaN at the poles.
pub fn gamma_signed(x: f64) -> f64 {
    let (ln, sign) = ln_gamma_signed(x);
    if sign == 0.0 {
        f64::NAN
    } else {
        sign * ln.exp()
    }
}

/// `ln B(a, b)` for `a, b > 0`.
#[inline]
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Beta function `B(a, b)`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::domain(
            "beta",
            format!("a = {a}, b = {b} must be positive"),
        ));
    }
    Ok(ln_beta(a, b).exp())
}

/// Rising factorial `(a)_n = a (a+1) ⋯ (a+n-1)`.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` for complex `z` (Lanczos, g = 7). The imaginary part is only
/// defined modulo 2π, which is irrelevant once exponentiated.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z) = π / (sin(πz) Γ(1-z))
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_complex(1.0 - z);
    }
    let w = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (w + k as f64);
    }
    let t = w + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (w + 0.5) * t.ln() - t + acc.ln()
}

/// `ln sin(πz)` without overflow for large `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let w = PI * z;
    let i = Complex64::i();
    if w.im >= 0.0 {
        // sin w = e^{-iw} (e^{2iw} - 1) / (2i)
        -i * w + (((2.0 * i * w).exp() - 1.0) / (2.0 * i)).ln()
    } else {
        // sin w = e^{iw} (1 - e^{-2iw}) / (2i)
        i * w + ((1.0 - (-2.0 * i * w).exp()) / (2.0 * i)).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Stirling series with enough terms to be an independent oracle for x ≥ 10.
    fn stirling_ln_gamma(x: f64) -> f64 {
        let x2 = x * x;
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2)
            + 1.0 / (1260.0 * x2 * x2 * x)
            - 1.0 / (1680.0 * x2 * x2 * x2 * x)
            + 1.0 / (1188.0 * x2 * x2 * x2 * x2 * x)
    }

    /// Oracle for small x: shift up with the recurrence, then Stirling.
    fn shifted_ln_gamma(x: f64) -> f64 {
        let mut y = x;
        let mut acc = 0.0;
        while y < 20.0 {
            acc -= y.ln();
            y += 1.0;
        }
        acc + stirling_ln_gamma(y)
    }

    #[test]
    fn log_gamma_trivial_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!((log_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-15);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn log_gamma_matches_stirling_oracle() {
        let mut x = 1e-3;
        while x < 1e6 {
            let got = log_gamma(x).unwrap();
            let want = shifted_ln_gamma(x);
            let rel = ((got - want) / want.abs().max(1e-300)).abs();
            // near the zeros of ln Γ at 1 and 2 compare absolutely
            let ok = rel <= 1e-13 || (got - want).abs() <= 1e-14;
            assert!(ok, "x = {x}: {got} vs {want} (rel {rel:e})");
            x *= 1.37;
        }
        let big = log_gamma(171.5).unwrap();
        assert!(big.is_finite());
        assert!((big - stirling_ln_gamma(171.5)).abs() / big < 1e-14);
    }

    #[test]
    fn beta_values() {
        assert!((beta(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((beta(0.5, 0.5).unwrap() - PI).abs() < 1e-14);
        assert!(beta(0.0, 1.0).is_err());
        // oracle: midpoint-free Gauss-Legendre is in oracles; here a direct
        // Simpson rule on the smooth integrand t^1.5 (1-t)^0.5 after t = sin²u
        let n = 20_000;
        let h = (PI / 2.0) / n as f64;
        let f = |u: f64| {
            let (s, c) = u.sin_cos();
            2.0 * s.powi(4) * c.powi(2)
        };
        let mut acc = f(0.0) + f(PI / 2.0);
        for i in 1..n {
            acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = acc * h / 3.0;
        assert!((beta(2.5, 1.5).unwrap() - oracle).abs() < 1e-13);
    }

    #[test]
    fn signed_gamma_reflection() {
        assert!((gamma_signed(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma_signed(-1.5) - 4.0 * PI.sqrt() / 3.0).abs() < 1e-13);
        assert!(gamma_signed(-2.0).is_nan());
        assert_eq!(ln_gamma_signed(-3.0).1, 0.0);
        assert!((gamma_signed(5.0) - 24.0).abs() < 1e-12);
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(3.0, 0), 1.0);
        assert_eq!(pochhammer(1.0, 5), 120.0);
        assert_eq!(pochhammer(-2.0, 3), 0.0);
        assert!((pochhammer(0.5, 3) - 0.5 * 1.5 * 2.5).abs() < 1e-15);
    }

    #[test]
    fn complex_log_gamma_agrees_on_real_axis() {
        for &x in &[0.1, 0.5, 1.0, 2.5, 7.3, 40.0, 150.0] {
            let z = ln_gamma_complex(Complex64::new(x, 0.0));
            assert!((z.re - ln_gamma(x)).abs() < 1e-12 * ln_gamma(x).abs().max(1.0));
        }
        // reflection branch
        let z = ln_gamma_complex(Complex64::new(-0.5, 0.0)).exp();
        assert!((z.re + 2.0 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn complex_log_gamma_modulus_identity() {
        // |Γ(½ + iy)|² = π / cosh(πy)
        for &y in &[0.3, 2.0, 10.0, 60.0, 200.0] {
            let ln = ln_gamma_complex(Complex64::new(0.5, y));
            let want = 0.5 * (PI.ln() - (PI * y).cosh().ln());
            assert!(
                (ln.re - want).abs() < 1e-11 * want.abs().max(1.0),
                "y = {y}"
            );
        }
        // |Γ(iy)|² = π / (y sinh πy), exercises the reflection branch
        for &y in &[0.7, 5.0, 40.0] {
            let ln = ln_gamma_complex(Complex64::new(0.0, y));
            let want = 0.5 * (PI.ln() - y.ln() - (PI * y).sinh().ln());
            assert!(
                (ln.re - want).abs() < 1e-11 * want.abs().max(1.0),
                "y = {y}"
            );
        }
    }
}

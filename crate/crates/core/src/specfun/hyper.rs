//! Gauss `₂F₁` and Kummer `₁F₁ = M`.

use super::gamma::ln_gamma_signed;
use super::{near_nonpositive_integer, CompensatedSum, Estimate, SeriesOptions};
use crate::{Error, Result};

/// `∏Γ(num) / ∏Γ(den)` through signed log-gamma. Denominator poles give 0.
pub(crate) fn gamma_ratio(num: &[f64], den: &[f64]) -> f64 {
    let mut ln = 0.0;
    let mut sign = 1.0;
    for &x in num {
        let (l, s) = ln_gamma_signed(x);
        if s == 0.0 {
            return f64::NAN;
        }
        ln += l;
        sign *= s;
    }
    for &x in den {
        let (l, s) = ln_gamma_signed(x);
        if s == 0.0 {
            return 0.0;
        }
        ln -= l;
        sign *= s;
    }
    sign * ln.exp()
}

/// Sums a hypergeometric-type series given the term ratio `t_{n+1}/t_n`.
///
/// `settle` is the index after which the ratio magnitudes are monotone, and
/// `limit_ratio` their limit; both feed the geometric tail bound.
fn sum_series<R>(
    ratio: R,
    settle: usize,
    limit_ratio: f64,
    cap: usize,
    opts: &SeriesOptions,
) -> Estimate
where
    R: Fn(usize) -> f64,
{
    let mut acc = CompensatedSum::new();
    let mut term = 1.0;
    acc.add(term);
    let mut small = 0usize;
    let mut n = 0usize;
    let tail_after = |term: f64, n: usize| -> f64 {
        let r = ratio(n).abs().max(ratio(n + 1).abs()).max(limit_ratio);
        if r < 1.0 {
            (term * ratio(n)).abs() / (1.0 - r)
        } else {
            f64::INFINITY
        }
    };
    loop {
        let rho = ratio(n);
        let next = term * rho;
        if next == 0.0 {
            // terminating series
            return Estimate::new(acc.value(), acc.rounding_bound(), n + 1, true);
        }
        acc.add(next);
        term = next;
        n += 1;
        let settled = n > settle && rho.abs() < 1.0;
        let tail = if settled {
            tail_after(term, n)
        } else {
            f64::INFINITY
        };
        let tiny = tail <= opts.rel_tol * acc.value().abs() || tail <= opts.abs_tol;
        small = if tiny { small + 1 } else { 0 };
        if small >= 2 {
            return Estimate::new(acc.value(), tail + acc.rounding_bound(), n + 1, true);
        }
        if n >= cap || !term.is_finite() {
            let bound = if settled { tail } else { term.abs() };
            return Estimate::new(acc.value(), bound.max(acc.rounding_bound()), n + 1, false);
        }
    }
}

fn plain_2f1(a: f64, b: f64, c: f64, x: f64, cap: usize, opts: &SeriesOptions) -> Estimate {
    let settle = if c < 0.0 { (-c).ceil() as usize + 1 } else { 0 };
    let settle = settle.max(if a < 0.0 { (-a).ceil() as usize } else { 0 });
    let settle = settle.max(if b < 0.0 { (-b).ceil() as usize } else { 0 });
    sum_series(
        |n| {
            let n = n as f64;
            (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x
        },
        settle,
        x.abs(),
        cap,
        opts,
    )
}

/// Gauss hypergeometric function `₂F₁(a, b; c; x)` for real `x < 1`.
///
/// Negative arguments go through the Pfaff transformation
/// `₂F₁(a,b;c;x) = (1-x)^{-b} ₂F₁(c-a, b; c; x/(x-1))`, and arguments close
/// to 1 through the `1 - x` connection formula when `c - a - b` is not an
/// integer.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64, opts: &SeriesOptions) -> Result<Estimate> {
    opts.validate()?;
    if near_nonpositive_integer(c, 0.0) {
        return Err(Error::pole(
            "gauss_2f1",
            format!("c = {c} is a non-positive integer"),
        ));
    }
    if !(x < 1.0) || !x.is_finite() || !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::domain(
            "gauss_2f1",
            format!("x = {x} must satisfy x < 1"),
        ));
    }
    if x == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(Estimate::exact(1.0));
    }
    let poly = near_nonpositive_integer(a, 0.0) || near_nonpositive_integer(b, 0.0);
    if poly {
        let cap = a.abs().max(b.abs()) as usize + 2;
        return Ok(plain_2f1(a, b, c, x, cap, opts));
    }
    if x < 0.0 {
        let w = x / (x - 1.0);
        let pre = (-b * (-x).ln_1p()).exp();
        let inner = positive_2f1(c - a, b, c, w, opts)?;
        return Ok(inner.scale(pre));
    }
    positive_2f1(a, b, c, x, opts)
}

fn positive_2f1(a: f64, b: f64, c: f64, x: f64, opts: &SeriesOptions) -> Result<Estimate> {
    let d = c - a - b;
    let poly = near_nonpositive_integer(a, 0.0) || near_nonpositive_integer(b, 0.0);
    if x <= 0.75 || poly {
        return Ok(plain_2f1(a, b, c, x, opts.max_order.max(64), opts));
    }
    if (d - d.round()).abs() < 1e-3 {
        // connection coefficients blow up; sum the slow series instead
        return Ok(plain_2f1(
            a,
            b,
            c,
            x,
            opts.max_order.saturating_mul(64),
            opts,
        ));
    }
    let y = 1.0 - x;
    let coef_a = gamma_ratio(&[c, d], &[c - a, c - b]);
    let coef_b = gamma_ratio(&[c, -d], &[a, b]) * y.powf(d);
    let mut est = Estimate::exact(0.0);
    if coef_a != 0.0 {
        let f = plain_2f1(a, b, 1.0 - d, y, opts.max_order.max(64), opts).scale(coef_a);
        est = f;
    }
    if coef_b != 0.0 {
        let g = plain_2f1(c - a, c - b, 1.0 + d, y, opts.max_order.max(64), opts).scale(coef_b);
        let cancel = (est.value.abs() + g.value.abs()) * 4.0 * f64::EPSILON;
        est = Estimate::new(
            est.value + g.value,
            est.err_bound + g.err_bound + cancel,
            est.terms_used + g.terms_used,
            est.converged && g.converged,
        );
    }
    if !est.value.is_finite() {
        return Ok(plain_2f1(
            a,
            b,
            c,
            x,
            opts.max_order.saturating_mul(64),
            opts,
        ));
    }
    Ok(est)
}

/// Kummer's confluent function `M(a, b, z) = ₁F₁(a; b; z)`.
pub fn kummer_m(a: f64, b: f64, z: f64, opts: &SeriesOptions) -> Result<Estimate> {
    opts.validate()?;
    if near_nonpositive_integer(b, 0.0) {
        return Err(Error::pole(
            "kummer_m",
            format!("b = {b} is a non-positive integer"),
        ));
    }
    if !z.is_finite() || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("kummer_m", "arguments must be finite"));
    }
    if z == 0.0 || a == 0.0 {
        return Ok(Estimate::exact(1.0));
    }
    if z < 0.0 && !near_nonpositive_integer(a, 0.0) {
        // M(a,b,z) = e^z M(b-a, b, -z) avoids alternating cancellation
        let inner = kummer_series(b - a, b, -z, opts);
        return Ok(inner.scale(z.exp()));
    }
    Ok(kummer_series(a, b, z, opts))
}

pub(crate) fn kummer_series(a: f64, b: f64, z: f64, opts: &SeriesOptions) -> Estimate {
    let settle = if b < 0.0 { (-b).ceil() as usize + 1 } else { 0 };
    let settle = settle.max((z.abs() - b).max(0.0) as usize);
    let cap = opts.max_order.max(settle + (2.0 * z.abs()) as usize + 64);
    sum_series(
        |n| {
            let n = n as f64;
            (a + n) / ((b + n) * (n + 1.0)) * z
        },
        settle,
        0.0,
        cap,
        opts,
    )
}

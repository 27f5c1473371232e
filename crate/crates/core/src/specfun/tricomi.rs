//! Tricomi's confluent hypergeometric function of the second kind, `U(a, b, z)`.
//!
//! Four independent routes are available; [`tricomi_u`] tries them in an order
//! chosen from `z` and keeps the first whose error bound meets the tolerance.

use super::gamma::{ln_gamma, ln_gamma_signed};
use super::hyper::{gamma_ratio, kummer_m};
use super::{near_nonpositive_integer, CompensatedSum, Estimate, SeriesOptions};
use crate::oracles::quadrature::{adaptive_quadrature, QuadOptions};
use crate::{Error, Result};

/// Half-width of the symmetric perturbation used at integer `b`. A power of
/// two, so `n ± ε` and the derived gamma arguments are exact.
const PERTURBATION: f64 = 1.0 / 4096.0;
/// Largest relative disagreement tolerated between the symmetric averages at
/// `ε` and `2ε`.
const PERTURBATION_AGREEMENT: f64 = 1e-6;
const MILLER_MAX_ORDER: usize = 1 << 17;

fn check_args(func: &'static str, a: f64, b: f64, z: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(func, format!("a = {a} must be positive")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(func, format!("z = {z} must be positive")));
    }
    if !b.is_finite() {
        return Err(Error::domain(func, format!("b = {b} must be finite")));
    }
    Ok(())
}

fn accept_tol(opts: &SeriesOptions) -> f64 {
    opts.rel_tol.max(1e-10)
}

fn accepted(e: &Estimate, opts: &SeriesOptions) -> bool {
    e.converged && e.value.is_finite() && e.rel_err() <= accept_tol(opts)
}

/// `U(a, b, z)` for `a > 0`, `z > 0`.
pub fn tricomi_u(a: f64, b: f64, z: f64, opts: &SeriesOptions) -> Result<Estimate> {
    opts.validate()?;
    check_args("tricomi_u", a, b, z)?;
    if near_nonpositive_integer(a - b + 1.0, 1e-14) {
        // the asymptotic series terminates: U is z^{-a} times a polynomial in 1/z
        return tricomi_u_asymptotic(a, b, z, opts);
    }
    let mut best: Option<Estimate> = None;
    let mut consider = |e: Estimate| -> bool {
        let ok = accepted(&e, opts);
        let better = match &best {
            None => e.value.is_finite(),
            Some(prev) => e.value.is_finite() && (e.rel_err() < prev.rel_err() || !prev.converged),
        };
        if better {
            best = Some(e);
        }
        ok
    };
    if z >= 10.0 && consider(tricomi_u_asymptotic(a, b, z, opts)?) {
        return Ok(best.expect("accepted estimate recorded"));
    }
    if z <= 2.0 && consider(tricomi_u_kummer(a, b, z, opts)?) {
        return Ok(best.expect("accepted estimate recorded"));
    }
    if a - b + 1.0 > 0.0 && consider(tricomi_u_miller(a, b, z, opts)?) {
        return Ok(best.expect("accepted estimate recorded"));
    }
    if consider(tricomi_u_laplace(a, b, z, opts)?) {
        return Ok(best.expect("accepted estimate recorded"));
    }
    best.ok_or_else(|| Error::domain("tricomi_u", format!("no finite value at ({a}, {b}, {z})")))
}

/// Large-`z` expansion `z^{-a} Σ (a)_n (a-b+1)_n (-1/z)^n / n!`, truncated at
/// its smallest term. Exact when `a - b + 1` is a non-positive integer.
pub fn tricomi_u_asymptotic(a: f64, b: f64, z: f64, opts: &SeriesOptions) -> Result<Estimate> {
    check_args("tricomi_u_asymptotic", a, b, z)?;
    let s = a - b + 1.0;
    let pre = (-a * z.ln()).exp();
    let mut acc = CompensatedSum::new();
    let mut term = 1.0f64;
    acc.add(term);
    let cap = opts.max_order.max(64);
    for n in 0..cap {
        let nf = n as f64;
        let next = -term * (a + nf) * (s + nf) / ((nf + 1.0) * z);
        if next == 0.0 {
            return Ok(Estimate::new(
                pre * acc.value(),
                pre * acc.rounding_bound(),
                n + 1,
                true,
            ));
        }
        if next.abs() >= term.abs() {
            // terms have started to grow; the smallest one bounds the error
            let err = 2.0 * next.abs();
            let done = err <= opts.rel_tol * acc.value().abs();
            return Ok(Estimate::new(
                pre * acc.value(),
                pre * (err + acc.rounding_bound()),
                n + 1,
                done,
            ));
        }
        if next.abs() <= 0.5 * opts.rel_tol * acc.value().abs() {
            let after = next * (a + nf + 1.0) * (s + nf + 1.0) / ((nf + 2.0) * z);
            acc.add(next);
            return Ok(Estimate::new(
                pre * acc.value(),
                pre * (2.0 * after.abs() + acc.rounding_bound()),
                n + 2,
                true,
            ));
        }
        acc.add(next);
        term = next;
    }
    Ok(Estimate::new(
        pre * acc.value(),
        pre * term.abs(),
        cap,
        false,
    ))
}

fn kummer_decomposition(a: f64, b: f64, z: f64, opts: &SeriesOptions) -> Result<Estimate> {
    let g1 = gamma_ratio(&[1.0 - b], &[a - b + 1.0]);
    let g2 = gamma_ratio(&[b - 1.0], &[a]);
    let m1 = kummer_m(a, b, z, opts)?;
    let m2 = kummer_m(a - b + 1.0, 2.0 - b, z, opts)?;
    let zp = ((1.0 - b) * z.ln()).exp();
    let t1 = g1 * m1.value;
    let t2 = g2 * zp * m2.value;
    let ln_mag = |x: f64| ln_gamma_signed(x).0.abs();
    // rounding of an argument close to a pole is amplified by |x|/dist
    let pole_cond = |x: f64| {
        let dist = (x - x.round()).abs();
        if x <= 0.5 && dist > 0.0 {
            x.abs() / dist
        } else {
            0.0
        }
    };
    let g1_err = 8.0
        * f64::EPSILON
        * (ln_mag(1.0 - b)
            + ln_mag(a - b + 1.0)
            + 1.0
            + pole_cond(1.0 - b)
            + pole_cond(a - b + 1.0));
    let g2_err = 8.0
        * f64::EPSILON
        * (ln_mag(b - 1.0) + ln_mag(a) + ((1.0 - b) * z.ln()).abs() + 1.0 + pole_cond(b - 1.0));
    let value = t1 + t2;
    let err = t1.abs() * (m1.rel_err() + g1_err)
        + t2.abs() * (m2.rel_err() + g2_err)
        + 4.0 * f64::EPSILON * (t1.abs() + t2.abs());
    Ok(Estimate::new(
        value,
        err,
        m1.terms_used + m2.terms_used,
        m1.converged && m2.converged && value.is_finite(),
    ))
}

/// Two-term decomposition through Kummer's `M`. At (near-)integer `b` the
/// decomposition has a removable singularity; there the value is interpolated
/// from `b ± ε` and `b ± 2ε`, flagged unconverged if those disagree.
pub fn tricomi_u_kummer(a: f64, b: f64, z: f64, opts: &SeriesOptions) -> Result<Estimate> {
    check_args("tricomi_u_kummer", a, b, z)?;
    if (b - b.round()).abs() >= 2.0 * PERTURBATION {
        return kummer_decomposition(a, b, z, opts);
    }
    let centre = b.round();
    // both terms grow like 1/ε and cancel, so the series need ε more digits
    let tight = opts.with_rel_tol(opts.rel_tol * PERTURBATION);
    let nodes = [-2.0, -1.0, 1.0, 2.0];
    let mut vals = [Estimate::exact(0.0); 4];
    for (v, &k) in vals.iter_mut().zip(&nodes) {
        *v = kummer_decomposition(a, centre + k * PERTURBATION, z, &tight)?;
    }
    // cubic interpolation in b through centre ± ε, ± 2ε; at the centre itself
    // this is one Richardson step on the symmetric averages
    let t = (b - centre) / PERTURBATION;
    let mut value = 0.0;
    let mut err = 0.0;
    for (i, &xi) in nodes.iter().enumerate() {
        let w: f64 = nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &xj)| (t - xj) / (xi - xj))
            .product();
        value += w * vals[i].value;
        err += w.abs() * vals[i].err_bound;
    }
    let fine = 0.5 * (vals[1].value + vals[2].value);
    let coarse = 0.5 * (vals[0].value + vals[3].value);
    let diff = (fine - coarse).abs();
    let agree = diff <= PERTURBATION_AGREEMENT * value.abs();
    Ok(Estimate::new(
        value,
        err + diff * PERTURBATION,
        vals.iter().map(|v| v.terms_used).sum(),
        vals.iter().all(|v| v.converged) && agree,
    ))
}

fn miller_pass(a: f64, b: f64, z: f64, order: usize) -> f64 {
    let s = a - b + 1.0;
    let mut v_next = 0.0f64;
    let mut v = 1.0f64;
    let mut total = 1.0f64;
    for n in (1..=order).rev() {
        let nf = n as f64;
        let prev = nf / ((a + nf - 1.0) * (s + nf - 1.0))
            * ((2.0 * (a + nf) + z - b) * v - (nf + 1.0) * v_next);
        v_next = v;
        v = prev;
        total += prev;
        if prev.abs() > 1e250 {
            v /= 1e250;
            v_next /= 1e250;
            total /= 1e250;
        }
    }
    (-a * z.ln()).exp() * v / total
}

/// Backward recurrence on the weighted sequence `(a)_n (a-b+1)_n / n! · U(a+n, b, z)`
/// normalised by its known sum `z^{-a}`; requires `a - b + 1 > 0`.
pub fn tricomi_u_miller(a: f64, b: f64, z: f64, opts: &SeriesOptions) -> Result<Estimate> {
    check_args("tricomi_u_miller", a, b, z)?;
    let s = a - b + 1.0;
    if !(s > 0.0) {
        return Err(Error::domain(
            "tricomi_u_miller",
            format!("a - b + 1 = {s} must be positive"),
        ));
    }
    let digits = (1.0 / opts.rel_tol).ln() + 5.0;
    let mut order = 16
        + (digits * digits / (4.0 * z))
            .ceil()
            .min(MILLER_MAX_ORDER as f64) as usize;
    let mut prev = miller_pass(a, b, z, order);
    while order < MILLER_MAX_ORDER {
        order *= 2;
        let cur = miller_pass(a, b, z, order);
        let diff = (cur - prev).abs();
        if diff <= opts.rel_tol * cur.abs() && cur.is_finite() {
            let err = diff + 16.0 * f64::EPSILON * cur.abs();
            return Ok(Estimate::new(cur, err, order, true));
        }
        prev = cur;
    }
    Ok(Estimate::new(prev, prev.abs(), order, false))
}

/// Numerical quadrature of `Γ(a)^{-1} ∫₀^∞ e^{-zt} t^{a-1} (1+t)^{b-a-1} dt`.
pub fn tricomi_u_laplace(a: f64, b: f64, z: f64, opts: &SeriesOptions) -> Result<Estimate> {
    check_args("tricomi_u_laplace", a, b, z)?;
    // t = u/z pulls the exponential scale to 1
    let pow = b - a - 1.0;
    let g = move |u: f64| (-u + pow * (u / z).ln_1p()).exp();
    let q = QuadOptions::rel(opts.rel_tol.max(1e-13));
    let head = if a < 1.0 {
        // u = v^{1/a} removes the u^{a-1} endpoint singularity
        adaptive_quadrature(|v: f64| g(v.powf(1.0 / a)), 0.0, 1.0, &q).scale(1.0 / a)
    } else {
        adaptive_quadrature(|u: f64| u.powf(a - 1.0) * g(u), 0.0, 1.0, &q)
    };
    let tail = adaptive_quadrature(
        |u: f64| ((a - 1.0) * u.ln() - u + pow * (u / z).ln_1p()).exp(),
        1.0,
        f64::INFINITY,
        &q,
    );
    let pre = (-a * z.ln() - ln_gamma(a)).exp();
    let value = pre * (head.value + tail.value);
    let err = pre * (head.err_bound + tail.err_bound) + 8.0 * f64::EPSILON * value.abs();
    Ok(Estimate::new(
        value,
        err,
        head.terms_used + tail.terms_used,
        head.converged && tail.converged,
    ))
}

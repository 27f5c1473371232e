//! Lauricella `F_B^{(n)}` multivariate hypergeometric series.
//!
//! The series is summed shell by shell (all multi-indices with the same total
//! order `K`), so the `1/(c)_K` factor is applied once per shell and the
//! stopping rule can look at whole shells rather than single terms.

use super::hyper::gauss_2f1;
use super::{near_nonpositive_integer, CompensatedSum, Estimate, SeriesOptions};
use crate::{Error, Result};

/// Parameters of the right-hand side of the `x -> x/(x-1)` transformation,
/// together with the scalar prefactor `∏(1 - x_i)^{-b_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedFb {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
    pub x: Vec<f64>,
    pub prefactor: f64,
}

fn check_lengths(a: &[f64], b: &[f64], x: &[f64]) -> Result<()> {
    if a.is_empty() || a.len() != b.len() || a.len() != x.len() {
        return Err(Error::Length(format!(
            "a, b and x must have the same non-zero length (got {}, {}, {})",
            a.len(),
            b.len(),
            x.len()
        )));
    }
    Ok(())
}

/// Applies `a_i -> c - a_i`, `x_i -> x_i/(x_i - 1)` with prefactor
/// `∏(1 - x_i)^{-b_i}`.
///
/// For one variable this is Pfaff's transformation and is an identity. For
/// two or more variables the transformed series is *not* equal to the
/// original; [`lauricella_fb`] therefore only applies it when `n = 1`.
pub fn transform_fb(a: &[f64], b: &[f64], c: f64, x: &[f64]) -> Result<TransformedFb> {
    check_lengths(a, b, x)?;
    let mut ln_pre = 0.0;
    let mut xt = Vec::with_capacity(x.len());
    for (i, (&xi, &bi)) in x.iter().zip(b).enumerate() {
        if xi == 1.0 {
            return Err(Error::SingularTransform { index: i });
        }
        if !(xi < 1.0) {
            return Err(Error::domain(
                "transform_fb",
                format!("x[{i}] = {xi} must be below 1"),
            ));
        }
        ln_pre -= bi * (-xi).ln_1p();
        xt.push(if xi == 0.0 { 0.0 } else { xi / (xi - 1.0) });
    }
    Ok(TransformedFb {
        a: a.iter().map(|&ai| c - ai).collect(),
        b: b.to_vec(),
        c,
        x: xt,
        prefactor: ln_pre.exp(),
    })
}

/// Raw multi-index series; requires `|x_i| < 1` for every `i`.
pub fn lauricella_fb_raw(
    a: &[f64],
    b: &[f64],
    c: f64,
    x: &[f64],
    opts: &SeriesOptions,
) -> Result<Estimate> {
    opts.validate()?;
    check_lengths(a, b, x)?;
    if near_nonpositive_integer(c, 0.0) {
        return Err(Error::pole(
            "lauricella_fb",
            format!("c = {c} is a non-positive integer"),
        ));
    }
    if let Some((i, xi)) = x.iter().enumerate().find(|(_, xi)| !(xi.abs() < 1.0)) {
        return Err(Error::domain(
            "lauricella_fb",
            format!("series diverges: |x[{i}]| = {} ≥ 1", xi.abs()),
        ));
    }
    Ok(shell_sum(a, b, c, x, opts))
}

/// `F_B^{(n)}(a; b; c; x)`.
///
/// With one variable and `x < 0` the Pfaff transformation is applied first
/// (falling back to [`gauss_2f1`] near the unit boundary). With more variables
/// every `|x_i|` must be below one.
pub fn lauricella_fb(
    a: &[f64],
    b: &[f64],
    c: f64,
    x: &[f64],
    opts: &SeriesOptions,
) -> Result<Estimate> {
    check_lengths(a, b, x)?;
    if x.len() == 1 && x[0] < 0.0 {
        let t = transform_fb(a, b, c, x)?;
        if t.x[0] > 0.9 {
            return gauss_2f1(a[0], b[0], c, x[0], opts);
        }
        return Ok(lauricella_fb_raw(&t.a, &t.b, t.c, &t.x, opts)?.scale(t.prefactor));
    }
    if x.len() == 1 && x[0] > 0.9 && x[0] < 1.0 {
        return gauss_2f1(a[0], b[0], c, x[0], opts);
    }
    lauricella_fb_raw(a, b, c, x, opts)
}

/// Per-variable coefficients `(a)_k (b)_k x^k / (k!)^2`, built by recurrence.
fn coefficients(a: f64, b: f64, x: f64, len: usize) -> Vec<f64> {
    let mut q = Vec::with_capacity(len);
    let mut t = 1.0;
    for k in 0..len {
        q.push(t);
        let kf = k as f64;
        t *= (a + kf) * (b + kf) * x / ((kf + 1.0) * (kf + 1.0));
    }
    q
}

/// `1 / C(k, j)` for `j = 0..=k`, filled from both ends towards the middle.
fn inverse_binomials(k: usize, out: &mut Vec<f64>) {
    out.clear();
    out.resize(k + 1, 1.0);
    let mut v = 1.0;
    for j in 0..k / 2 {
        v *= (j + 1) as f64 / (k - j) as f64;
        out[j + 1] = v;
        out[k - j - 1] = v;
    }
}

fn shell_sum(a: &[f64], b: &[f64], c: f64, x: &[f64], opts: &SeriesOptions) -> Estimate {
    let n = x.len();
    let order = opts.max_order;
    // coefficient tables grow on demand
    let mut cap = 64.min(order + 1).max(2);
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|i| coefficients(a[i], b[i], x[i], cap))
        .collect();
    // partial convolutions P^{(l)}_K for each level, plus absolute-value twins
    let mut p = vec![Vec::<f64>::new(); n];
    let mut pa = vec![Vec::<f64>::new(); n];
    let mut inv = Vec::new();
    let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut acc = CompensatedSum::new();
    let mut abs_total = 0.0;
    let mut ratio_k = 1.0f64; // K! / (c)_K
    let mut quiet = 0usize;
    let mut last_abs = f64::NAN;
    let mut work = 0usize;
    let mut k = 0usize;
    loop {
        if k >= cap {
            cap = (cap * 2).min(order + 1);
            q = (0..n)
                .map(|i| coefficients(a[i], b[i], x[i], cap))
                .collect();
        }
        inverse_binomials(k, &mut inv);
        // level 0 is the first variable's coefficient on its own
        p[0].push(q[0][k]);
        pa[0].push(q[0][k].abs());
        for l in 1..n {
            let mut s = 0.0;
            let mut sa = 0.0;
            for j in 0..=k {
                let w = q[l][j] * inv[j];
                s += p[l - 1][k - j] * w;
                sa += pa[l - 1][k - j] * w.abs();
            }
            p[l].push(s);
            pa[l].push(sa);
            work += k + 1;
        }
        let shell = p[n - 1][k] * ratio_k;
        let shell_abs = pa[n - 1][k] * ratio_k.abs();
        acc.add(shell);
        abs_total += shell_abs;
        let prev_abs = last_abs;
        last_abs = shell_abs;

        let small = shell_abs <= opts.rel_tol * acc.value().abs() || shell_abs <= opts.abs_tol;
        quiet = if small && k > 0 { quiet + 1 } else { 0 };
        let kf = k as f64;
        ratio_k *= (kf + 1.0) / (c + kf);
        k += 1;

        let rounding = 4.0 * (n as f64 + 2.0) * f64::EPSILON * abs_total + acc.rounding_bound();
        let finished = quiet >= 2 || shell_abs == 0.0 && k > 1 && prev_abs == 0.0;
        let exhausted = k > order || work >= opts.max_total_terms || !acc.value().is_finite();
        if finished || exhausted {
            let observed = if prev_abs > 0.0 {
                last_abs / prev_abs
            } else {
                0.0
            };
            let rho = observed.max(xmax);
            let tail = if rho < 1.0 {
                last_abs * rho / (1.0 - rho)
            } else {
                f64::INFINITY
            };
            return Estimate::new(acc.value(), tail + rounding, work + k, finished);
        }
    }
}

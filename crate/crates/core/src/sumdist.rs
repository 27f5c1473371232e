//! Distribution of the MRC output SNR `γ = Σ γ_ℓ` over independent F branches.
//!
//! The density and CDF of the sum are Lauricella `F_B^{(L)}` series in the
//! arguments `x_ℓ = -γ/θ_ℓ`. The series only converges for `|x_ℓ| < 1` and
//! suffers cancellation well before that, so each evaluation first predicts
//! the cancellation loss and, when it is too large, falls back to a numerical
//! convolution that peels off one branch at a time down to the single-branch
//! closed forms. The route taken is reported with every value.

use std::cell::Cell;

use crate::channel::{reg_inc_beta, BranchParams};
use crate::oracles::quadrature::{adaptive_quadrature, QuadOptions};
use crate::specfun::{gauss_2f1, lauricella_fb_raw, ln_beta, ln_gamma, Estimate, SeriesOptions};
use crate::{Error, Result};

/// Largest number of branches accepted by [`pdf_sum`] and [`cdf_sum`].
pub const MAX_BRANCHES: usize = 6;

/// An ordered list of independent branches (`L ≥ 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SumChannel {
    branches: Vec<BranchParams>,
}

impl SumChannel {
    pub fn new(branches: Vec<BranchParams>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::Length("a channel needs at least one branch".into()));
        }
        for b in &branches {
            b.validate()?;
        }
        Ok(SumChannel { branches })
    }

    /// `L` identical copies of `p`.
    pub fn iid(p: BranchParams, l: usize) -> Result<Self> {
        Self::new(vec![p; l])
    }

    pub fn branches(&self) -> &[BranchParams] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// True iff every branch has the same `(m, m_s, γ̄)`.
    pub fn is_iid(&self) -> bool {
        self.branches.windows(2).all(|w| w[0] == w[1])
    }

    /// `Σ m_ℓ`, the diversity order.
    pub fn total_m(&self) -> f64 {
        self.branches.iter().map(|b| b.m).sum()
    }

    /// Copy with every `γ̄_ℓ` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        SumChannel {
            branches: self
                .branches
                .iter()
                .map(|b| b.with_gamma_bar(b.gamma_bar * factor))
                .collect(),
        }
    }

    fn without(&self, index: usize) -> Self {
        let mut branches = self.branches.clone();
        branches.remove(index);
        SumChannel { branches }
    }
}

/// Which evaluation routes [`pdf_sum`] / [`cdf_sum`] may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutePolicy {
    /// Series where it is predicted to be accurate, convolution elsewhere.
    Auto,
    /// Always the Lauricella series; fails outside its convergence region.
    SeriesOnly,
    /// Always the numerical convolution.
    ConvolutionOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub series: SeriesOptions,
    pub quad: QuadOptions,
    pub policy: RoutePolicy,
    /// Largest predicted cancellation loss (natural log) for the series route.
    pub max_cancellation: f64,
    /// Largest `|x_ℓ|` for the series route.
    pub max_series_argument: f64,
    /// Relative error bound a series result must meet to be kept.
    pub series_accept: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            series: SeriesOptions::default(),
            quad: QuadOptions::rel(1e-10),
            policy: RoutePolicy::Auto,
            max_cancellation: 1e6f64.ln(),
            max_series_argument: 0.9,
            series_accept: 1e-9,
        }
    }
}

impl EvalOptions {
    pub fn with_policy(mut self, policy: RoutePolicy) -> Self {
        self.policy = policy;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalRoute {
    /// `L = 1`: closed-form single-branch expression.
    SingleBranch,
    /// Lauricella series.
    Series,
    /// Numerical convolution fallback.
    Convolution,
}

/// A value of the sum distribution together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumEstimate {
    pub estimate: Estimate,
    pub route: EvalRoute,
    /// The raw value lay outside `[0, 1]` (CDF) or below 0 (PDF) by less than
    /// its error bound and was clamped.
    pub clamped: bool,
}

impl SumEstimate {
    #[inline]
    pub fn value(&self) -> f64 {
        self.estimate.value
    }

    /// True when the value did not come from a converged closed form or series.
    pub fn flagged(&self) -> bool {
        self.route == EvalRoute::Convolution || !self.estimate.converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Pdf,
    Cdf,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            "sumdist",
            format!("gamma = {gamma} must be non-negative"),
        ))
    }
}

/// `Σ [ln Γ(m_ℓ + m_sℓ) - ln Γ(m_sℓ) - m_ℓ ln θ_ℓ]`.
fn ln_branch_constant(ch: &SumChannel) -> f64 {
    ch.branches
        .iter()
        .map(crate::channel::ln_small_snr_constant)
        .sum()
}

/// Predicted natural-log cancellation loss of the alternating series:
/// `Σ a_ℓ ln((1+|x_ℓ|)/(1-|x_ℓ|))`, the log-ratio of the absolute series to
/// the true value.
fn predicted_loss(ch: &SumChannel, gamma: f64) -> f64 {
    ch.branches
        .iter()
        .map(|b| {
            let x = gamma / b.theta();
            if x >= 1.0 {
                f64::INFINITY
            } else {
                (b.m + b.m_s) * ((2.0 * x) / (1.0 - x)).ln_1p()
            }
        })
        .sum()
}

fn max_argument(ch: &SumChannel, gamma: f64) -> f64 {
    ch.branches
        .iter()
        .map(|b| gamma / b.theta())
        .fold(0.0, f64::max)
}

fn series(ch: &SumChannel, gamma: f64, kind: Kind, opts: &SeriesOptions) -> Result<Estimate> {
    let a: Vec<f64> = ch.branches.iter().map(|b| b.m + b.m_s).collect();
    let b: Vec<f64> = ch.branches.iter().map(|b| b.m).collect();
    let x: Vec<f64> = ch.branches.iter().map(|p| -gamma / p.theta()).collect();
    let total = ch.total_m();
    let (c, ln_pre) = match kind {
        Kind::Pdf => (total, (total - 1.0) * gamma.ln() - ln_gamma(total)),
        Kind::Cdf => (total + 1.0, total * gamma.ln() - ln_gamma(total + 1.0)),
    };
    let f = lauricella_fb_raw(&a, &b, c, &x, opts)?;
    let ln_pre = ln_pre + ln_branch_constant(ch);
    let mut e = f.scale(ln_pre.exp());
    e.err_bound += e.value.abs() * 4.0 * f64::EPSILON * (ln_pre.abs() + 1.0);
    Ok(e)
}

/// The untransformed Lauricella series for the sum density; requires every
/// `γ/θ_ℓ < 1`.
pub fn pdf_sum_series(ch: &SumChannel, gamma: f64, opts: &SeriesOptions) -> Result<Estimate> {
    check_gamma(gamma)?;
    series(ch, gamma, Kind::Pdf, opts)
}

/// The untransformed Lauricella series for the sum CDF.
pub fn cdf_sum_series(ch: &SumChannel, gamma: f64, opts: &SeriesOptions) -> Result<Estimate> {
    check_gamma(gamma)?;
    series(ch, gamma, Kind::Cdf, opts)
}

/// Density of `Σ γ_ℓ` at `gamma`.
pub fn pdf_sum(ch: &SumChannel, gamma: f64, opts: &EvalOptions) -> Result<SumEstimate> {
    check_gamma(gamma)?;
    evaluate(ch, gamma, Kind::Pdf, opts)
}

/// CDF of `Σ γ_ℓ` at `gamma`.
pub fn cdf_sum(ch: &SumChannel, gamma: f64, opts: &EvalOptions) -> Result<SumEstimate> {
    check_gamma(gamma)?;
    evaluate(ch, gamma, Kind::Cdf, opts)
}

fn evaluate(ch: &SumChannel, gamma: f64, kind: Kind, opts: &EvalOptions) -> Result<SumEstimate> {
    if ch.len() > MAX_BRANCHES {
        return Err(Error::TooManyBranches {
            branches: ch.len(),
            max: MAX_BRANCHES,
        });
    }
    let raw = evaluate_unclamped(ch, gamma, kind, opts)?;
    Ok(clamp(raw, kind))
}

fn clamp(mut s: SumEstimate, kind: Kind) -> SumEstimate {
    let e = &mut s.estimate;
    if e.value < 0.0 && -e.value <= e.err_bound {
        e.value = 0.0;
        s.clamped = true;
    }
    if kind == Kind::Cdf && e.value > 1.0 && e.value - 1.0 <= e.err_bound {
        e.value = 1.0;
        s.clamped = true;
    }
    s
}

fn evaluate_unclamped(
    ch: &SumChannel,
    gamma: f64,
    kind: Kind,
    opts: &EvalOptions,
) -> Result<SumEstimate> {
    if ch.len() == 1 {
        let p = &ch.branches[0];
        let estimate = match kind {
            Kind::Pdf => Estimate::exact(p.pdf(gamma)?),
            Kind::Cdf => p.cdf_estimate(gamma, &opts.series)?,
        };
        return Ok(SumEstimate {
            estimate,
            route: EvalRoute::SingleBranch,
            clamped: false,
        });
    }
    if gamma == 0.0 {
        return Ok(SumEstimate {
            estimate: Estimate::exact(origin_value(ch, kind)),
            route: EvalRoute::Series,
            clamped: false,
        });
    }
    if gamma.is_infinite() {
        let v = if kind == Kind::Cdf { 1.0 } else { 0.0 };
        return Ok(SumEstimate {
            estimate: Estimate::exact(v),
            route: EvalRoute::Series,
            clamped: false,
        });
    }
    let try_series = match opts.policy {
        RoutePolicy::SeriesOnly => true,
        RoutePolicy::ConvolutionOnly => false,
        RoutePolicy::Auto => {
            max_argument(ch, gamma) <= opts.max_series_argument
                && predicted_loss(ch, gamma) <= opts.max_cancellation
        }
    };
    if try_series {
        let e = series(ch, gamma, kind, &opts.series)?;
        let good = e.converged && e.rel_err() <= opts.series_accept;
        if good || opts.policy == RoutePolicy::SeriesOnly {
            return Ok(SumEstimate {
                estimate: e,
                route: EvalRoute::Series,
                clamped: false,
            });
        }
    }
    convolution(ch, gamma, kind, opts)
}

/// Value at `γ = 0`, from the leading power `γ^{M-1}` (PDF) or `γ^M` (CDF).
fn origin_value(ch: &SumChannel, kind: Kind) -> f64 {
    let total = ch.total_m();
    match kind {
        Kind::Cdf => 0.0,
        Kind::Pdf if total > 1.0 => 0.0,
        Kind::Pdf if total < 1.0 => f64::INFINITY,
        Kind::Pdf => (ln_branch_constant(ch) - ln_gamma(total)).exp(),
    }
}

/// `∫₀^γ f_last(v) · h(γ - v) dv` where `h` is the density or CDF of the
/// remaining branches.
///
/// The interval is split in half and each half is integrated in the log of
/// the distance to its outer endpoint, which tames both the algebraic
/// behaviour at the origin and the narrow peaks that appear when `γ` is far
/// above the branch scales.
fn convolution(ch: &SumChannel, gamma: f64, kind: Kind, opts: &EvalOptions) -> Result<SumEstimate> {
    // peel the branch with the largest m: its density is the least singular
    let (idx, last) = ch
        .branches
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.m.total_cmp(&b.1.m))
        .map(|(i, b)| (i, *b))
        .expect("non-empty channel");
    let rest = ch.without(idx);
    let inner_rel = Cell::new(0.0f64);
    let inner_ok = Cell::new(true);
    let failure: Cell<Option<Error>> = Cell::new(None);
    let inner = |w: f64| -> f64 {
        match evaluate_unclamped(&rest, w, kind, opts) {
            Ok(s) => {
                let r = s.estimate.rel_err();
                if r.is_finite() {
                    inner_rel.set(inner_rel.get().max(r));
                }
                if !s.estimate.converged {
                    inner_ok.set(false);
                }
                s.estimate.value
            }
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let half = 0.5 * gamma;
    // x = half · e^{-y}: each half becomes a smooth bump in y with exponential
    // tails, wherever the mass of the densities sits relative to γ
    let left = adaptive_quadrature(
        |y: f64| {
            let v = half * (-y).exp();
            if v == 0.0 {
                return 0.0;
            }
            let f = (last.ln_pdf(v) + v.ln()).exp();
            if f == 0.0 {
                0.0
            } else {
                f * inner(gamma - v)
            }
        },
        0.0,
        f64::INFINITY,
        &opts.quad,
    );
    let right = adaptive_quadrature(
        |y: f64| {
            let w = half * (-y).exp();
            if w == 0.0 {
                return 0.0;
            }
            let f = (last.ln_pdf(gamma - w)).exp() * w;
            if f == 0.0 {
                0.0
            } else {
                f * inner(w)
            }
        },
        0.0,
        f64::INFINITY,
        &opts.quad,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let value = left.value + right.value;
    let err = left.err_bound + right.err_bound + inner_rel.get() * value.abs();
    Ok(SumEstimate {
        estimate: Estimate::new(
            value,
            err,
            left.terms_used + right.terms_used,
            left.converged && right.converged && inner_ok.get() && value.is_finite(),
        ),
        route: EvalRoute::Convolution,
        clamped: false,
    })
}

/// Product of the per-branch MGFs, `E[e^{-tγ}] = ∏ M_ℓ(t)`.
pub fn mgf_sum(ch: &SumChannel, t: f64) -> Result<Estimate> {
    mgf_sum_with(ch, t, &SeriesOptions::default())
}

pub fn mgf_sum_with(ch: &SumChannel, t: f64, opts: &SeriesOptions) -> Result<Estimate> {
    let mut acc = Estimate::exact(1.0);
    for b in &ch.branches {
        acc = acc.mul(b.mgf_with(t, opts)?);
    }
    Ok(acc)
}

fn iid_scale(p: &BranchParams, l: usize) -> f64 {
    p.m / (l as f64 * p.m_s * p.gamma_bar)
}

/// Elementary i.i.d. density: an F-shaped law with shapes `(Lm, Lm_s)` and
/// rate `m/(L m_s γ̄)`.
///
/// This closed form is *not* the exact density of the sum of `L` i.i.d.
/// branches (its MGF is not the `L`-th power of the branch MGF); it is kept
/// for comparison with [`pdf_sum`].
pub fn pdf_sum_iid(p: &BranchParams, l: usize, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if l == 0 {
        return Err(Error::Length("L must be at least 1".into()));
    }
    let lf = l as f64;
    let (a, b) = (lf * p.m, lf * p.m_s);
    let k = iid_scale(p, l);
    if gamma == 0.0 {
        return Ok(if a > 1.0 {
            0.0
        } else if a == 1.0 {
            (a * k.ln() - ln_beta(a, b)).exp()
        } else {
            f64::INFINITY
        });
    }
    let ln = a * k.ln() + (a - 1.0) * gamma.ln() - (a + b) * (k * gamma).ln_1p() - ln_beta(a, b);
    Ok(ln.exp())
}

/// The same i.i.d. density written with `₂F₁(L(m+m_s), Lm; Lm; -kγ)`.
pub fn pdf_sum_iid_2f1(
    p: &BranchParams,
    l: usize,
    gamma: f64,
    opts: &SeriesOptions,
) -> Result<Estimate> {
    check_gamma(gamma)?;
    if l == 0 {
        return Err(Error::Length("L must be at least 1".into()));
    }
    let lf = l as f64;
    let (a, b) = (lf * p.m, lf * p.m_s);
    let k = iid_scale(p, l);
    if gamma == 0.0 {
        return Ok(Estimate::exact(pdf_sum_iid(p, l, 0.0)?));
    }
    let f = gauss_2f1(a + b, a, a, -k * gamma, opts)?;
    let ln = a * k.ln() + (a - 1.0) * gamma.ln() - ln_beta(a, b);
    Ok(f.scale(ln.exp()))
}

/// CDF companion of [`pdf_sum_iid`]:
/// `Γ(Lm+Lm_s)/(Γ(Lm_s)Γ(1+Lm)) (kγ)^{Lm} ₂F₁(L(m+m_s), Lm; 1+Lm; -kγ)`.
///
/// For `kγ > 1` the argument is moved into `[0, 1)` by the Pfaff
/// transformation, which turns the expression into `I_x(Lm, Lm_s)` with
/// `x = kγ/(1+kγ)`; that form is evaluated directly.
pub fn cdf_sum_iid(
    p: &BranchParams,
    l: usize,
    gamma: f64,
    opts: &SeriesOptions,
) -> Result<Estimate> {
    check_gamma(gamma)?;
    if l == 0 {
        return Err(Error::Length("L must be at least 1".into()));
    }
    if gamma == 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let lf = l as f64;
    let (a, b) = (lf * p.m, lf * p.m_s);
    let y = iid_scale(p, l) * gamma;
    if y <= 1.0 {
        let f = gauss_2f1(a + b, a, 1.0 + a, -y, opts)?;
        let ln = ln_gamma(a + b) - ln_gamma(b) - ln_gamma(1.0 + a) + a * y.ln();
        return Ok(f.scale(ln.exp()));
    }
    reg_inc_beta(a, b, y / (1.0 + y), 1.0 / (1.0 + y), opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(m: f64, ms: f64, g: f64) -> BranchParams {
        BranchParams::new(m, ms, g).unwrap()
    }

    #[test]
    fn single_branch_reduction() {
        let p = bp(2.5, 1.5, 3.0);
        let ch = SumChannel::new(vec![p]).unwrap();
        for &g in &[0.1, 1.0, 7.0, 100.0] {
            let s = pdf_sum(&ch, g, &EvalOptions::default()).unwrap();
            assert_eq!(s.route, EvalRoute::SingleBranch);
            assert!((s.value() - p.pdf(g).unwrap()).abs() <= 1e-14 * p.pdf(g).unwrap());
            let series = pdf_sum_series(&ch, 0.3 * p.theta(), &SeriesOptions::default()).unwrap();
            let direct = p.pdf(0.3 * p.theta()).unwrap();
            assert!((series.value - direct).abs() <= 1e-10 * direct);
        }
    }

    #[test]
    fn routes_agree_in_overlap() {
        let ch = SumChannel::new(vec![bp(2.5, 1.5, 10.0), bp(1.5, 1.25, 5.0)]).unwrap();
        let o = EvalOptions::default();
        for &g in &[0.5, 1.5, 2.5] {
            let s = cdf_sum(&ch, g, &o.with_policy(RoutePolicy::SeriesOnly)).unwrap();
            let c = cdf_sum(&ch, g, &o.with_policy(RoutePolicy::ConvolutionOnly)).unwrap();
            assert_eq!(c.route, EvalRoute::Convolution);
            assert!(
                (s.value() - c.value()).abs() < 1e-9,
                "γ={g}: {} vs {}",
                s.value(),
                c.value()
            );
            let s = pdf_sum(&ch, g, &o.with_policy(RoutePolicy::SeriesOnly)).unwrap();
            let c = pdf_sum(&ch, g, &o.with_policy(RoutePolicy::ConvolutionOnly)).unwrap();
            assert!((s.value() - c.value()).abs() < 1e-9 * s.value(), "γ={g}");
        }
    }

    #[test]
    fn origin_and_infinity() {
        let ch = SumChannel::new(vec![bp(1.0, 1.0, 1.0), bp(0.5, 2.0, 1.0)]).unwrap();
        let o = EvalOptions::default();
        assert_eq!(cdf_sum(&ch, 0.0, &o).unwrap().value(), 0.0);
        assert_eq!(pdf_sum(&ch, 0.0, &o).unwrap().value(), 0.0);
        assert_eq!(cdf_sum(&ch, f64::INFINITY, &o).unwrap().value(), 1.0);
        assert!(cdf_sum(&ch, -1.0, &o).is_err());
    }

    #[test]
    fn branch_cap() {
        let ch = SumChannel::iid(bp(1.0, 2.0, 1.0), 7).unwrap();
        assert!(matches!(
            cdf_sum(&ch, 1.0, &EvalOptions::default()),
            Err(Error::TooManyBranches {
                branches: 7,
                max: 6
            })
        ));
    }

    #[test]
    fn iid_forms() {
        let p = bp(1.5, 2.3, 2.0);
        for &g in &[0.01, 0.5, 3.0, 40.0] {
            let e8 = pdf_sum_iid(&p, 3, g).unwrap();
            let e7 = pdf_sum_iid_2f1(&p, 3, g, &SeriesOptions::default()).unwrap();
            assert!((e7.value - e8).abs() <= 1e-10 * e8, "γ={g}");
        }
        let unit = bp(1.0, 1.0, 1.0);
        assert!(
            (cdf_sum_iid(&unit, 1, 1.0, &SeriesOptions::default())
                .unwrap()
                .value
                - 0.5)
                .abs()
                < 1e-14
        );
        assert!((pdf_sum_iid(&unit, 1, 1.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn iid_predicate_and_scaling() {
        let p = bp(1.0, 2.0, 3.0);
        let ch = SumChannel::iid(p, 3).unwrap();
        assert!(ch.is_iid());
        assert_eq!(ch.total_m(), 3.0);
        let s = ch.scaled(2.0);
        assert_eq!(s.branches()[1].gamma_bar, 6.0);
        let mixed = SumChannel::new(vec![p, bp(1.0, 2.0, 4.0)]).unwrap();
        assert!(!mixed.is_iid());
        assert!(SumChannel::new(vec![]).is_err());
    }
}

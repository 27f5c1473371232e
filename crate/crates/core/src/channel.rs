//! Single-branch Fisher-Snedecor F composite fading.
//!
//! The instantaneous SNR of a branch has density
//!
//! ```text
//! f(γ) = m^m (m_s γ̄)^{m_s} γ^{m-1} / [B(m, m_s) (mγ + m_s γ̄)^{m+m_s}]
//! ```
//!
//! i.e. `γ = θ · G₁/G₂` with `θ = m_s γ̄ / m`, `G₁ ~ Gamma(m)`, `G₂ ~ Gamma(m_s)`.
//! `γ̄` is the scale parameter of this density. The actual mean is
//! `γ̄ m_s / (m_s - 1)` (see [`BranchParams::moment`]).

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::specfun::{gauss_2f1, ln_beta, ln_gamma, meijer_g_mgf, Estimate, SeriesOptions};
use crate::{Error, Result};

/// Per-branch fading triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchParams {
    /// Multipath fading severity.
    pub m: f64,
    /// Shadowing shape.
    pub m_s: f64,
    /// Mean-SNR scale, linear units.
    pub gamma_bar: f64,
}

/// Result of [`BranchParams::moment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    /// `E[γ^k]` diverges because `m_s ≤ k`.
    Infinite,
}

impl Moment {
    pub fn value(self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(v),
            Moment::Infinite => None,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: v,
            reason: "must be positive and finite",
        })
    }
}

impl BranchParams {
    pub fn new(m: f64, m_s: f64, gamma_bar: f64) -> Result<Self> {
        positive("m", m)?;
        positive("m_s", m_s)?;
        positive("gamma_bar", gamma_bar)?;
        Ok(BranchParams { m, m_s, gamma_bar })
    }

    /// Builds a branch from a mean-SNR scale given in dB.
    pub fn from_db(m: f64, m_s: f64, gamma_bar_db: f64) -> Result<Self> {
        Self::new(m, m_s, crate::db_to_linear(gamma_bar_db))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        Self::new(self.m, self.m_s, self.gamma_bar).map(|_| ())
    }

    /// Scale `θ = m_s γ̄ / m` of the underlying beta-prime variate.
    #[inline]
    pub fn theta(&self) -> f64 {
        self.m_s * self.gamma_bar / self.m
    }

    /// Copy with a different `γ̄`.
    pub fn with_gamma_bar(&self, gamma_bar: f64) -> Self {
        BranchParams { gamma_bar, ..*self }
    }

    /// Probability density at `gamma`. At `γ = 0` this is `0` for `m > 1`,
    /// `m_s/θ` for `m = 1` and `+∞` for `m < 1`.
    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::domain(
                "pdf",
                format!("gamma = {gamma} must be non-negative"),
            ));
        }
        Ok(self.ln_pdf(gamma).exp())
    }

    /// Natural log of the density; `-∞` / `+∞` at the origin where applicable.
    pub fn ln_pdf(&self, gamma: f64) -> f64 {
        let theta = self.theta();
        let (m, ms) = (self.m, self.m_s);
        if gamma == 0.0 {
            return if m > 1.0 {
                f64::NEG_INFINITY
            } else if m == 1.0 {
                (ms / theta).ln()
            } else {
                f64::INFINITY
            };
        }
        if gamma.is_infinite() {
            return f64::NEG_INFINITY;
        }
        let x = gamma / theta;
        (m - 1.0) * x.ln() - (m + ms) * x.ln_1p() - theta.ln() - ln_beta(m, ms)
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        Ok(self.cdf_estimate(gamma, &SeriesOptions::default())?.value)
    }

    /// CDF with its error record: the regularised incomplete beta
    /// `I_x(m, m_s)` at `x = γ/(γ + θ)`.
    pub fn cdf_estimate(&self, gamma: f64, opts: &SeriesOptions) -> Result<Estimate> {
        if !(gamma >= 0.0) {
            return Err(Error::domain(
                "cdf",
                format!("gamma = {gamma} must be non-negative"),
            ));
        }
        if gamma == 0.0 {
            return Ok(Estimate::exact(0.0));
        }
        if gamma.is_infinite() {
            return Ok(Estimate::exact(1.0));
        }
        let theta = self.theta();
        // x and 1-x computed separately to keep the small one accurate
        let x = gamma / (gamma + theta);
        let y = theta / (gamma + theta);
        reg_inc_beta(self.m, self.m_s, x, y, opts)
    }

    /// Moment generating function `E[e^{-tγ}]`.
    pub fn mgf(&self, t: f64) -> Result<Estimate> {
        self.mgf_with(t, &SeriesOptions::default())
    }

    pub fn mgf_with(&self, t: f64, opts: &SeriesOptions) -> Result<Estimate> {
        if !(t >= 0.0) || t.is_infinite() {
            return Err(Error::domain(
                "mgf",
                format!("t = {t} must be non-negative and finite"),
            ));
        }
        if t == 0.0 {
            return Ok(Estimate::exact(1.0));
        }
        let z = self.m / (self.m_s * self.gamma_bar * t);
        meijer_g_mgf(self.m, self.m_s, z, opts)
    }

    /// `E[γ^k]`, finite only for `m_s > k`.
    pub fn moment(&self, k: u32) -> Moment {
        let kf = f64::from(k);
        if k == 0 {
            return Moment::Finite(1.0);
        }
        if self.m_s <= kf {
            return Moment::Infinite;
        }
        let ln = kf * self.theta().ln() + ln_beta(self.m + kf, self.m_s - kf)
            - ln_beta(self.m, self.m_s);
        Moment::Finite(ln.exp())
    }

    /// Exact sampler bound to these parameters.
    pub fn sampler(&self) -> BranchSampler {
        BranchSampler {
            theta: self.theta(),
            g1: Gamma::new(self.m, 1.0).expect("validated shape"),
            g2: Gamma::new(self.m_s, 1.0).expect("validated shape"),
        }
    }

    /// Draws one SNR value. Prefer [`BranchParams::sampler`] in loops.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().sample(rng)
    }
}

/// Ratio-of-gammas sampler, `θ G₁ / G₂`.
#[derive(Debug, Clone, Copy)]
pub struct BranchSampler {
    theta: f64,
    g1: Gamma<f64>,
    g2: Gamma<f64>,
}

impl BranchSampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = self.g1.sample(rng);
        let b = self.g2.sample(rng);
        self.theta * a / b
    }
}

impl Distribution<f64> for BranchSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        BranchSampler::sample(self, rng)
    }
}

/// `I_x(a, b)` with `y = 1 - x` supplied separately.
///
/// Uses `x^a/(a B(a,b)) ₂F₁(a, 1-b; a+1; x)` on the
/// side of the distribution where the series converges fast, and the
/// complement `1 - I_y(b, a)` otherwise.
pub(crate) fn reg_inc_beta(
    a: f64,
    b: f64,
    x: f64,
    y: f64,
    opts: &SeriesOptions,
) -> Result<Estimate> {
    if x <= 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    if y <= 0.0 {
        return Ok(Estimate::exact(1.0));
    }
    let lower = |a: f64, b: f64, x: f64| -> Result<Estimate> {
        let pre = (a * x.ln() - a.ln() - ln_beta(a, b)).exp();
        Ok(gauss_2f1(a, 1.0 - b, a + 1.0, x, opts)?.scale(pre))
    };
    if x <= (a + 1.0) / (a + b + 2.0) {
        let e = lower(a, b, x)?;
        Ok(clamp_unit(e))
    } else {
        let e = lower(b, a, y)?;
        Ok(clamp_unit(Estimate::new(
            1.0 - e.value,
            e.err_bound + f64::EPSILON,
            e.terms_used,
            e.converged,
        )))
    }
}

fn clamp_unit(mut e: Estimate) -> Estimate {
    if e.value < 0.0 && -e.value <= e.err_bound {
        e.value = 0.0;
    }
    if e.value > 1.0 && e.value - 1.0 <= e.err_bound {
        e.value = 1.0;
    }
    e
}

/// Coherent binary modulation family, identified by its constant `λ` in
/// `P_b = Q(√(2λγ))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulationKind {
    Bpsk,
    Bfsk,
    BfskMinCorr,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation {
    pub kind: ModulationKind,
    pub lambda: f64,
}

impl Modulation {
    pub const BPSK: Modulation = Modulation {
        kind: ModulationKind::Bpsk,
        lambda: 1.0,
    };
    pub const BFSK: Modulation = Modulation {
        kind: ModulationKind::Bfsk,
        lambda: 0.5,
    };
    pub const BFSK_MIN_CORR: Modulation = Modulation {
        kind: ModulationKind::BfskMinCorr,
        lambda: 0.715,
    };

    pub fn custom(lambda: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        Ok(Modulation {
            kind: ModulationKind::Custom,
            lambda,
        })
    }

    /// Parses `bpsk`, `bfsk` or `bfsk_min_corr`.
    pub fn from_label(label: &str) -> Option<Self> {
        match label.to_ascii_lowercase().as_str() {
            "bpsk" => Some(Self::BPSK),
            "bfsk" => Some(Self::BFSK),
            "bfsk_min_corr" => Some(Self::BFSK_MIN_CORR),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            ModulationKind::Bpsk => "bpsk",
            ModulationKind::Bfsk => "bfsk",
            ModulationKind::BfskMinCorr => "bfsk_min_corr",
            ModulationKind::Custom => "custom",
        }
    }
}

/// `ln Γ(m + m_s) - ln Γ(m_s) - m ln θ`: log of the per-branch constant that
/// multiplies `γ^m` in the small-`γ` expansion of the CDF.
pub(crate) fn ln_small_snr_constant(p: &BranchParams) -> f64 {
    ln_gamma(p.m + p.m_s) - ln_gamma(p.m_s) - p.m * p.theta().ln()
}

//! Real-valued special-function kernel.
//!
//! Every series evaluator returns an [`Estimate`] carrying a truncation bound
//! and a convergence flag instead of a bare `f64`.

mod gamma;
mod hyper;
mod lauricella;
mod meijer;
mod tricomi;

pub use gamma::{
    beta, gamma_signed, ln_beta, ln_gamma, ln_gamma_complex, ln_gamma_signed, log_gamma, pochhammer,
};
pub use hyper::{gauss_2f1, kummer_m};
pub use lauricella::{lauricella_fb, lauricella_fb_raw, transform_fb, TransformedFb};
pub use meijer::{meijer_g_ber, meijer_g_ber_contour, meijer_g_ber_residues, meijer_g_mgf};
pub use tricomi::{
    tricomi_u, tricomi_u_asymptotic, tricomi_u_kummer, tricomi_u_laplace, tricomi_u_miller,
};

/// Truncation controls shared by the series evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Relative tolerance used by the stopping rule.
    pub rel_tol: f64,
    /// Absolute floor below which contributions are ignored.
    pub abs_tol: f64,
    /// Per-dimension term cap.
    pub max_order: usize,
    /// Global cap on multiply-adds for multivariate series.
    pub max_total_terms: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            max_order: 512,
            max_total_terms: 5_000_000,
        }
    }
}

impl SeriesOptions {
    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub(crate) fn validate(&self) -> crate::Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(crate::Error::InvalidParameter {
                name: "rel_tol",
                value: self.rel_tol,
                reason: "must be positive",
            });
        }
        if self.max_order == 0 || self.max_total_terms == 0 {
            return Err(crate::Error::InvalidParameter {
                name: "max_order",
                value: self.max_order as f64,
                reason: "caps must be positive",
            });
        }
        Ok(())
    }
}

/// A numeric result together with its error record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Truncation bound or quadrature error estimate (absolute, ≥ 0).
    pub err_bound: f64,
    pub terms_used: usize,
    /// `false` when a cap was hit before the stopping rule was met.
    pub converged: bool,
}

impl Estimate {
    pub fn new(value: f64, err_bound: f64, terms_used: usize, converged: bool) -> Self {
        Estimate {
            value,
            err_bound: err_bound.abs(),
            terms_used,
            converged,
        }
    }

    /// A value known to machine precision.
    pub fn exact(value: f64) -> Self {
        Estimate::new(value, value.abs() * f64::EPSILON, 0, true)
    }

    /// Relative error bound; infinite when the value is zero but the bound is not.
    pub fn rel_err(&self) -> f64 {
        if self.err_bound == 0.0 {
            0.0
        } else if self.value == 0.0 {
            f64::INFINITY
        } else {
            self.err_bound / self.value.abs()
        }
    }

    /// Product of two estimates with first-order error propagation.
    pub fn mul(self, other: Estimate) -> Estimate {
        let value = self.value * other.value;
        let err = self.err_bound * other.value.abs()
            + other.err_bound * self.value.abs()
            + self.err_bound * other.err_bound;
        Estimate::new(
            value,
            err,
            self.terms_used + other.terms_used,
            self.converged && other.converged,
        )
    }

    /// Multiplies by an exactly known scale factor.
    pub fn scale(self, factor: f64) -> Estimate {
        Estimate::new(
            self.value * factor,
            self.err_bound * factor.abs() + (self.value * factor).abs() * f64::EPSILON,
            self.terms_used,
            self.converged,
        )
    }
}

/// Neumaier's variant of Kahan compensated summation, also tracking `Σ|term|`
/// so callers can bound cancellation error.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// `Σ|term|` of everything added so far.
    #[inline]
    pub fn abs_sum(&self) -> f64 {
        self.abs
    }

    /// Rounding error bound from the condition of the sum.
    #[inline]
    pub fn rounding_bound(&self) -> f64 {
        4.0 * f64::EPSILON * self.abs
    }
}

/// Returns true when `x` is within `tol` of a non-positive integer.
pub(crate) fn near_nonpositive_integer(x: f64, tol: f64) -> bool {
    x <= tol && (x - x.round()).abs() <= tol
}

/// Gaussian Q-function, `Q(x) = ½ erfc(x/√2)`.
pub fn gaussian_q(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

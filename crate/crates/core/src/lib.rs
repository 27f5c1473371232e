//! Statistics of sums of independent Fisher-Snedecor F fading variates and
//! the performance of L-branch maximal-ratio-combining (MRC) receivers.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: real special-function kernel (gamma family, Gaussian Q,
//!   Gauss/Kummer/Tricomi hypergeometric functions, Lauricella `F_B`, and the
//!   two Meijer-G instances needed for the MGF and the average BER).
//! - [`channel`]: single-branch F fading distribution and exact sampler.
//! - [`sumdist`]: distribution of the MRC output SNR `γ = Σ γ_ℓ`.
//! - [`metrics`]: outage probability, outage capacity and average BER.
//! - [`oracles`]: independent ground truth (quadrature, convolution,
//!   Laplace transform, seeded Monte Carlo).
//!
//! All SNR quantities are linear power ratios; use [`db_to_linear`] at the
//! boundary.

pub mod channel;
pub mod error;
pub mod metrics;
pub mod oracles;
pub mod specfun;
pub mod sumdist;

pub use channel::{BranchParams, Modulation, ModulationKind, Moment};
pub use error::{Error, Result};
pub use metrics::{BerMethod, BerResult, CapacitySpec};
pub use specfun::{Estimate, SeriesOptions};
pub use sumdist::{EvalOptions, EvalRoute, SumChannel, SumEstimate};

/// Converts a power ratio in dB to linear units, `10^(dB/10)`.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

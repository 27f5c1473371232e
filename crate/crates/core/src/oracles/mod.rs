//! Independent ground truth for the closed forms: quadrature, numerical
//! convolution and Laplace transforms, seeded Monte Carlo and a KS test.
//!
//! Nothing here calls the series machinery of [`crate::sumdist`] except
//! through the function arguments supplied by the caller.

pub mod convolution;
pub mod ks;
pub mod montecarlo;
pub mod quadrature;

pub use convolution::{numeric_convolution, ConvolutionOptions, SampledDensity};
pub use ks::{ks_critical_value, ks_test, KsOutcome};
pub use montecarlo::{
    draw_sums, simulate_ber, simulate_sum, substream_seed, McEstimate, SimConfig, SumSamples,
};
pub use quadrature::{adaptive_quadrature, gauss_legendre, QuadOptions};

use crate::specfun::Estimate;

/// `∫₀^∞ e^{-tγ} f(γ) dγ` by adaptive quadrature.
pub fn numeric_laplace<F: Fn(f64) -> f64>(f: F, t: f64, opts: &QuadOptions) -> Estimate {
    adaptive_quadrature(
        |g: f64| {
            let w = (-t * g).exp();
            if w == 0.0 {
                0.0
            } else {
                w * f(g)
            }
        },
        0.0,
        f64::INFINITY,
        opts,
    )
}

//! One-sample Kolmogorov–Smirnov test against an expensive CDF.
//!
//! The CDF is evaluated on a few hundred nodes placed at empirical quantiles
//! (plus the extreme samples), interpolated monotonically in `ln γ`, and the
//! statistic is taken exactly over all samples against the interpolant.
//! The interpolation error is measured at held-out interval midpoints and
//! reported next to the statistic.

use super::montecarlo::SumSamples;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    /// `sup |F_n - F̃|` over the samples, `F̃` the interpolated CDF.
    pub statistic: f64,
    /// Largest `|F - F̃|` seen at the held-out midpoints.
    pub interpolation_error: f64,
    pub n: usize,
    pub nodes: usize,
}

impl KsOutcome {
    /// Statistic plus interpolation error.
    pub fn bound(&self) -> f64 {
        self.statistic + self.interpolation_error
    }
}

/// Asymptotic critical value `sqrt(-ln(α/2)/2) / √n`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(0.5 * alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

struct MonotoneCubic {
    t: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

/// One-sided three-point slope at an end node, kept monotone.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d.signum() * d.abs().min(3.0 * d0.abs())
    }
}

impl MonotoneCubic {
    fn new(t: Vec<f64>, y: Vec<f64>) -> Self {
        let n = t.len();
        let mut d = vec![0.0; n];
        if n >= 2 {
            let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
            let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
            d[0] = delta[0];
            d[n - 1] = delta[n - 2];
            if n >= 3 {
                d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
                d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
            }
            for k in 1..n - 1 {
                // three-point derivative, clipped to the monotone region
                let (lo, hi) = (delta[k - 1], delta[k]);
                if lo * hi <= 0.0 {
                    d[k] = 0.0;
                } else {
                    let centred = (h[k] * lo + h[k - 1] * hi) / (h[k - 1] + h[k]);
                    let cap = 3.0 * lo.abs().min(hi.abs());
                    d[k] = centred.signum() * centred.abs().min(cap);
                }
            }
        }
        MonotoneCubic { t, y, d }
    }

    fn eval_in(&self, k: usize, x: f64) -> f64 {
        let h = self.t[k + 1] - self.t[k];
        let s = (x - self.t[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }

    fn interval(&self, x: f64) -> usize {
        let i = self.t.partition_point(|&v| v <= x);
        i.saturating_sub(1).min(self.t.len().saturating_sub(2))
    }

    fn eval(&self, x: f64) -> f64 {
        if self.t.len() == 1 {
            return self.y[0];
        }
        self.eval_in(self.interval(x), x)
    }
}

fn node_probabilities(n_uniform: usize, n_samples: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n_uniform)
        .map(|j| (j as f64 + 0.5) / n_uniform as f64)
        .collect();
    // geometric in both tails, overlapping the first few uniform nodes
    let floor = 0.1 / n_samples as f64;
    let mut q = 4.0 / n_uniform as f64;
    while q > floor {
        q /= 10f64.powf(1.0 / 6.0);
        p.push(q);
        p.push(1.0 - q);
    }
    p.sort_by(f64::total_cmp);
    p
}

/// KS test of `samples` against `cdf` using about `nodes` CDF evaluations
/// (plus a quarter as many for the interpolation check).
pub fn ks_test<F>(samples: &SumSamples, cdf: F, nodes: usize) -> Result<KsOutcome>
where
    F: Fn(f64) -> Result<f64>,
{
    let xs = samples.sorted();
    let n = xs.len();
    if n == 0 {
        return Err(Error::Length("no samples".into()));
    }
    if xs[0] <= 0.0 {
        return Err(Error::domain("ks_test", "samples must be positive"));
    }
    let mut grid: Vec<f64> = node_probabilities(nodes.max(8), n)
        .into_iter()
        .map(|p| samples.quantile(p))
        .collect();
    grid.push(xs[0]);
    grid.push(xs[n - 1]);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut t = Vec::with_capacity(grid.len());
    let mut y = Vec::with_capacity(grid.len());
    for &g in &grid {
        t.push(g.ln());
        y.push(cdf(g)?);
    }
    let interp = MonotoneCubic::new(t, y);

    let mut interp_err = 0.0f64;
    for k in (0..interp.t.len().saturating_sub(1)).step_by(4) {
        let mid = 0.5 * (interp.t[k] + interp.t[k + 1]);
        let exact = cdf(mid.exp())?;
        interp_err = interp_err.max((exact - interp.eval_in(k, mid)).abs());
    }

    let mut d = 0.0f64;
    let nf = n as f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = interp.eval(x.ln()).clamp(0.0, 1.0);
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    Ok(KsOutcome {
        statistic: d,
        interpolation_error: interp_err,
        n,
        nodes: interp.t.len(),
    })
}

//! Iterated trapezoid convolution of densities on a uniform grid.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionOptions {
    /// Grid intervals on the first pass.
    pub initial_intervals: usize,
    /// Largest number of grid intervals before giving up.
    pub max_intervals: usize,
    /// Stagnation tolerance on the max change between successive halvings,
    /// relative to the largest density value.
    pub tol: f64,
}

impl Default for ConvolutionOptions {
    fn default() -> Self {
        ConvolutionOptions {
            initial_intervals: 256,
            max_intervals: 1 << 15,
            tol: 1e-6,
        }
    }
}

/// Density values on `0, h, 2h, …, n h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDensity {
    pub step: f64,
    pub values: Vec<f64>,
    /// Max change observed at the last halving, relative to the peak value.
    pub last_change: f64,
    pub converged: bool,
}

impl SampledDensity {
    /// Linear interpolation; `None` outside the grid.
    pub fn at(&self, x: f64) -> Option<f64> {
        if !(x >= 0.0) {
            return None;
        }
        let pos = x / self.step;
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return (i + 1 == self.values.len() && pos == i as f64).then(|| self.values[i]);
        }
        let frac = pos - i as f64;
        Some(self.values[i] * (1.0 - frac) + self.values[i + 1] * frac)
    }
}

fn sample(f: &dyn Fn(f64) -> f64, h: f64, n: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = (0..=n).map(|k| f(k as f64 * h)).collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain(
            "numeric_convolution",
            "density is not finite on the grid (singular at the origin?)",
        ));
    }
    Ok(v)
}

fn convolve_once(acc: &[f64], next: &[f64], h: f64) -> Vec<f64> {
    let n = acc.len();
    let mut out = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        let mut s = 0.5 * (acc[0] * next[k] + acc[k] * next[0]);
        for j in 1..k {
            s += acc[j] * next[k - j];
        }
        *o = s * h;
    }
    out
}

fn pass(pdfs: &[&dyn Fn(f64) -> f64], upper: f64, n: usize) -> Result<Vec<f64>> {
    let h = upper / n as f64;
    let mut acc = sample(pdfs[0], h, n)?;
    for f in &pdfs[1..] {
        let next = sample(*f, h, n)?;
        acc = convolve_once(&acc, &next, h);
    }
    Ok(acc)
}

/// Density of the sum of independent variables with the given densities on
/// `[0, upper]`, refining the grid by halving until successive passes agree.
pub fn numeric_convolution(
    pdfs: &[&dyn Fn(f64) -> f64],
    upper: f64,
    opts: &ConvolutionOptions,
) -> Result<SampledDensity> {
    if pdfs.is_empty() {
        return Err(Error::Length("at least one density is required".into()));
    }
    if !(upper > 0.0) || !upper.is_finite() {
        return Err(Error::domain(
            "numeric_convolution",
            "upper must be positive and finite",
        ));
    }
    let mut n = opts.initial_intervals.max(2);
    let mut prev = pass(pdfs, upper, n)?;
    loop {
        let next_n = n * 2;
        let cur = pass(pdfs, upper, next_n)?;
        let peak = cur.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let change = prev
            .iter()
            .enumerate()
            .map(|(i, v)| (cur[2 * i] - v).abs())
            .fold(0.0f64, f64::max)
            / peak.max(f64::MIN_POSITIVE);
        let done = change <= opts.tol;
        if done || next_n * 2 > opts.max_intervals {
            return Ok(SampledDensity {
                step: upper / next_n as f64,
                values: cur,
                last_change: change,
                converged: done,
            });
        }
        prev = cur;
        n = next_n;
    }
}

//! Preset scenarios for the three reference figures.

use fsmrc::Modulation;

use crate::error::{CliError, Result};
use crate::eval::Metric;
use crate::scenario::{BranchSpec, Scenario, SweepSpec, SweepVariable};

pub const DEFAULT_TRIALS: usize = 100_000;
pub const QUICK_TRIALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub metric: Metric,
    pub curves: Vec<(String, Scenario)>,
}

fn branch(m: f64, m_s: f64) -> BranchSpec {
    BranchSpec {
        m,
        m_s,
        gamma_bar_db: 0.0,
    }
}

fn base(branches: Vec<BranchSpec>, to: f64, quick: bool, trials: usize, seed: u64) -> Scenario {
    Scenario {
        branches,
        modulation: Modulation::BPSK,
        sweep: SweepSpec {
            variable: SweepVariable::GammaBarDb,
            from: 0.0,
            to,
            step: if quick { 5.0 } else { 2.0 },
        },
        trials,
        seed,
        gamma_th_db: 0.0,
        c_th_over_w: 1.0,
        t: 1.0,
    }
}

/// Builds figure `n`. `trials` defaults to [`DEFAULT_TRIALS`], or
/// [`QUICK_TRIALS`] with `quick`, which also coarsens the sweep.
pub fn figure(n: u32, quick: bool, trials: Option<usize>, seed: u64) -> Result<Figure> {
    let trials = trials.unwrap_or(if quick { QUICK_TRIALS } else { DEFAULT_TRIALS });
    let fig = match n {
        // outage probability, i.i.d. branches, threshold 0 dB
        1 => Figure {
            metric: Metric::Op,
            curves: (1..=2)
                .map(|l| {
                    (
                        format!("L={l}"),
                        base(vec![branch(2.5, 1.5); l], 40.0, quick, trials, seed),
                    )
                })
                .collect(),
        },
        // outage capacity for one to three branches and two capacity thresholds
        2 => Figure {
            metric: Metric::Oc,
            curves: [1.0, 2.0]
                .iter()
                .flat_map(|&c| {
                    (1..=3).map(move |l| {
                        let mut sc = base(vec![branch(1.5, 1.25); l], 30.0, quick, trials, seed);
                        sc.c_th_over_w = c;
                        (format!("L={l},c_th_over_w={c}"), sc)
                    })
                })
                .collect(),
        },
        // BPSK over three unequal branches under three shadowing levels
        3 => Figure {
            metric: Metric::Ber,
            curves: [0.5, 5.0, 50.0]
                .iter()
                .map(|&ms| {
                    let branches = vec![branch(1.0, ms), branch(1.5, ms), branch(2.0, ms)];
                    (
                        format!("m_s={ms}"),
                        base(branches, 30.0, quick, trials, seed),
                    )
                })
                .collect(),
        },
        other => {
            return Err(CliError::Schema(format!(
                "figure: no preset {other}; expected 1, 2 or 3"
            )))
        }
    };
    Ok(fig)
}

//! Built-in validation suite with a deterministic JSON report.
//!
//! Every check is phrased as `measured <= threshold`; `margin` is
//! `threshold - measured`. The report contains no timings, so two runs with
//! the same seed produce identical bytes.

use std::f64::consts::PI;

use clap::ValueEnum;
use fsmrc::metrics::{
    ber_asymptotic, ber_closed_form, ber_quadrature, empirical_diversity, outage_probability,
    outage_probability_asymptotic,
};
use fsmrc::oracles::{
    adaptive_quadrature, ks_critical_value, ks_test, numeric_laplace, simulate_ber, simulate_sum,
    QuadOptions, SimConfig,
};
use fsmrc::specfun::{gauss_2f1, kummer_m, lauricella_fb, log_gamma, tricomi_u};
use fsmrc::sumdist::{cdf_sum, mgf_sum, pdf_sum, RoutePolicy};
use fsmrc::{db_to_linear, BranchParams, EvalOptions, Modulation, SeriesOptions, SumChannel};
use serde::Serialize;

use crate::error::Result;
use crate::eval::{evaluate, Metric};
use crate::output::write_csv;
use crate::scenario::ScenarioFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub module: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub level: Level,
    pub seed: u64,
    pub bpsk_lambda: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failed(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

struct Suite {
    level: Level,
    seed: u64,
    bpsk: Modulation,
    checks: Vec<Check>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn bp(m: f64, ms: f64, g: f64) -> BranchParams {
    BranchParams::new(m, ms, g).expect("valid preset")
}

fn channel(b: &[BranchParams]) -> SumChannel {
    SumChannel::new(b.to_vec()).expect("valid preset")
}

impl Suite {
    fn quick(&self) -> bool {
        self.level == Level::Quick
    }

    fn trials(&self) -> usize {
        if self.quick() {
            100_000
        } else {
            1_000_000
        }
    }

    /// Records a check; an error while measuring counts as a failure.
    fn check(&mut self, module: &'static str, name: &str, threshold: f64, measured: Result<f64>) {
        let measured = measured.unwrap_or(f64::NAN);
        let passed = measured <= threshold;
        self.checks.push(Check {
            name: name.to_string(),
            module,
            passed,
            measured,
            threshold,
            margin: threshold - measured,
        });
    }

    fn specfun(&mut self) {
        let o = SeriesOptions::default();
        self.check(
            "specfun",
            "log_gamma_half",
            1e-14,
            (|| -> Result<f64> { Ok((log_gamma(0.5)? - 0.5 * PI.ln()).abs()) })(),
        );
        self.check(
            "specfun",
            "gauss_elementary",
            1e-12,
            (|| -> Result<f64> { Ok(rel(gauss_2f1(1.0, 2.0, 2.0, 0.5, &o)?.value, 2.0)) })(),
        );
        self.check(
            "specfun",
            "kummer_exponential",
            1e-11,
            (|| -> Result<f64> {
                let mut worst = 0.0f64;
                for z in [-7.0, -1.0, 2.5, 15.0] {
                    worst = worst.max(rel(kummer_m(1.3, 1.3, z, &o)?.value, z.exp()));
                }
                Ok(worst)
            })(),
        );
        self.check(
            "specfun",
            "tricomi_power",
            1e-10,
            (|| -> Result<f64> {
                let mut worst = 0.0f64;
                for (a, z) in [(0.5, 0.3), (2.0, 4.0), (1.7, 40.0)] {
                    worst = worst.max(rel(tricomi_u(a, a + 1.0, z, &o)?.value, z.powf(-a)));
                }
                Ok(worst)
            })(),
        );
        self.check(
            "specfun",
            "lauricella_single_variable",
            1e-12,
            (|| -> Result<f64> {
                let (a, b, c, x) = (2.5, 1.5, 4.0, -0.6);
                Ok(rel(
                    lauricella_fb(&[a], &[b], c, &[x], &o)?.value,
                    gauss_2f1(a, b, c, x, &o)?.value,
                ))
            })(),
        );
    }

    fn channel(&mut self) {
        let unit = bp(1.0, 1.0, 1.0);
        self.check(
            "channel",
            "unit_case_cdf",
            1e-10,
            unit.cdf(1.0).map(|v| (v - 0.5).abs()).map_err(Into::into),
        );
        self.check(
            "channel",
            "unit_case_pdf",
            1e-10,
            unit.pdf(1.0).map(|v| (v - 0.25).abs()).map_err(Into::into),
        );
        self.check(
            "channel",
            "nakagami_limit_cdf",
            1e-3,
            (|| -> Result<f64> {
                let mut worst = 0.0f64;
                for m in [1u32, 2, 3] {
                    let gbar = 2.0;
                    let p = bp(m as f64, 1e5, gbar);
                    for k in 1..=40 {
                        let g = 0.25 * k as f64;
                        let x = m as f64 * g / gbar;
                        // integer-shape regularised incomplete gamma
                        let mut term = 1.0;
                        let mut tail = 1.0;
                        for j in 1..m {
                            term *= x / j as f64;
                            tail += term;
                        }
                        let want = 1.0 - (-x).exp() * tail;
                        worst = worst.max((p.cdf(g)? - want).abs());
                    }
                }
                Ok(worst)
            })(),
        );
        self.check(
            "channel",
            "pdf_normalisation",
            1e-8,
            (|| -> Result<f64> {
                let p = bp(2.5, 1.5, 10.0);
                let total = adaptive_quadrature(
                    |g| p.pdf(g).unwrap_or(f64::NAN),
                    0.0,
                    f64::INFINITY,
                    &QuadOptions::rel(1e-11),
                );
                Ok((total.value - 1.0).abs())
            })(),
        );
    }

    fn sumdist(&mut self) {
        let opts = EvalOptions::default();
        let two = channel(&[bp(2.5, 1.5, 10.0), bp(1.5, 1.25, 5.0)]);
        let three = channel(&[bp(1.0, 5.0, 2.0), bp(1.5, 5.0, 3.0), bp(2.0, 5.0, 4.0)]);
        let (sets, ts): (Vec<&SumChannel>, &[f64]) = if self.quick() {
            (vec![&two], &[1.0])
        } else {
            (vec![&two, &three], &[0.1, 1.0, 10.0])
        };
        self.check(
            "sumdist",
            "laplace_of_pdf_is_mgf_product",
            1e-5,
            (|| -> Result<f64> {
                let q = QuadOptions::rel(1e-8);
                let mut worst = 0.0f64;
                for ch in &sets {
                    for &t in ts {
                        let lap = numeric_laplace(
                            |g| pdf_sum(ch, g, &opts).map(|e| e.value()).unwrap_or(f64::NAN),
                            t,
                            &q,
                        );
                        worst = worst.max(rel(lap.value, mgf_sum(ch, t)?.value));
                    }
                }
                Ok(worst)
            })(),
        );
        self.check(
            "sumdist",
            "series_and_convolution_agree",
            1e-8,
            (|| -> Result<f64> {
                let s = cdf_sum(&two, 1.0, &opts.with_policy(RoutePolicy::SeriesOnly))?;
                let c = cdf_sum(&two, 1.0, &opts.with_policy(RoutePolicy::ConvolutionOnly))?;
                Ok(rel(s.value(), c.value()))
            })(),
        );
        self.check(
            "sumdist",
            "unit_pair_density",
            1e-10,
            (|| -> Result<f64> {
                let ch = SumChannel::iid(bp(1.0, 1.0, 1.0), 2)?;
                Ok(rel(
                    pdf_sum(&ch, 1.0, &opts)?.value(),
                    1.0 / 9.0 + 4.0 / 27.0 * 2f64.ln(),
                ))
            })(),
        );
    }

    fn metrics(&mut self) {
        let opts = EvalOptions::default();
        let so = SeriesOptions::default();
        let points = if self.quick() { 4 } else { 7 };
        let op = |c: &SumChannel| outage_probability(c, 1.0, &opts).map(|e| e.value());
        let bpsk = self.bpsk;
        let ber = move |c: &SumChannel| ber_quadrature(c, &bpsk, &so).map(|r| r.value);

        let fig1 = SumChannel::iid(bp(2.5, 1.5, 1.0), 2).expect("valid preset");
        self.check(
            "metrics",
            "outage_diversity_order",
            0.05,
            (|| -> Result<f64> {
                Ok((empirical_diversity(&fig1, 35.0, 50.0, points, op)? / 5.0 - 1.0).abs())
            })(),
        );
        let shadowing: &[f64] = if self.quick() {
            &[5.0]
        } else {
            &[0.5, 5.0, 50.0]
        };
        self.check(
            "metrics",
            "ber_diversity_order",
            0.05,
            (|| -> Result<f64> {
                let mut worst = 0.0f64;
                for &ms in shadowing {
                    let ch = channel(&[bp(1.0, ms, 1.0), bp(1.5, ms, 1.0), bp(2.0, ms, 1.0)]);
                    worst = worst.max(
                        (empirical_diversity(&ch, 35.0, 50.0, points, ber)? / 4.5 - 1.0).abs(),
                    );
                }
                Ok(worst)
            })(),
        );
        let high = db_to_linear(45.0);
        self.check(
            "metrics",
            "outage_asymptote_45db",
            0.05,
            (|| -> Result<f64> {
                let ch = channel(&[bp(2.5, 1.5, high)]);
                Ok((outage_probability_asymptotic(&ch, 1.0)? / op(&ch)? - 1.0).abs())
            })(),
        );
        self.check(
            "metrics",
            "ber_asymptote_45db",
            0.05,
            (|| -> Result<f64> {
                let ch = channel(&[bp(2.5, 1.5, high)]);
                Ok((ber_asymptotic(&ch, &bpsk)? / ber(&ch)? - 1.0).abs())
            })(),
        );
        let combos: &[(f64, f64, f64, f64)] = if self.quick() {
            &[
                (1.0, 0.5, 1.0, 1.0),
                (2.5, 1.5, 10.0, 0.5),
                (1.5, 50.0, 100.0, 0.715),
            ]
        } else {
            &[
                (0.5, 0.5, 1.0, 1.0),
                (1.0, 0.5, 1.0, 1.0),
                (1.0, 5.0, 10.0, 0.5),
                (1.5, 1.25, 3.0, 0.715),
                (1.5, 50.0, 100.0, 0.715),
                (2.0, 2.0, 0.5, 1.0),
                (2.5, 1.5, 10.0, 0.5),
                (2.5, 5.0, 1000.0, 1.0),
                (3.0, 0.75, 30.0, 0.5),
                (4.0, 10.0, 0.1, 1.0),
                (0.75, 3.0, 300.0, 0.715),
                (5.0, 20.0, 5.0, 1.0),
            ]
        };
        self.check(
            "metrics",
            "ber_closed_form_matches_quadrature",
            1e-8,
            (|| -> Result<f64> {
                let mut worst = 0.0f64;
                for &(m, ms, g, lambda) in combos {
                    let ch = channel(&[bp(m, ms, g)]);
                    let md = Modulation::custom(lambda)?;
                    worst = worst.max(rel(
                        ber_closed_form(&ch, &md, &so)?.value,
                        ber_quadrature(&ch, &md, &so)?.value,
                    ));
                }
                Ok(worst)
            })(),
        );
        self.check(
            "metrics",
            "ber_rayleigh_limit",
            1e-3,
            (|| -> Result<f64> {
                let mut worst = 0.0f64;
                for g in [1.0f64, 10.0] {
                    let want = 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
                    worst = worst.max(rel(ber(&channel(&[bp(1.0, 1e5, g)]))?, want));
                }
                Ok(worst)
            })(),
        );
        self.check(
            "metrics",
            "multipath_outweighs_shadowing",
            1.0,
            (|| -> Result<f64> {
                let g = db_to_linear(20.0);
                let at = |m: f64, ms: f64| ber(&channel(&[bp(m, ms, g)]));
                let multipath = at(1.0, 5.0)? / at(2.0, 5.0)?;
                let shadow = at(1.0, 0.5)? / at(1.0, 50.0)?;
                Ok(shadow / multipath)
            })(),
        );
    }

    fn oracles(&mut self) {
        let n = self.trials();
        let seed = self.seed;
        let bpsk = self.bpsk;
        self.check(
            "oracles",
            "simulated_ber_within_4_sigma",
            4.0,
            (|| -> Result<f64> {
                let g = db_to_linear(5.0);
                let ch = channel(&[bp(1.0, 5.0, g), bp(1.5, 5.0, g), bp(2.0, 5.0, g)]);
                let mc = simulate_ber(&ch, &bpsk, &SimConfig::new(seed, n))?;
                let q = ber_quadrature(&ch, &bpsk, &SeriesOptions::default())?.value;
                Ok((mc.mean - q).abs() / mc.std_err)
            })(),
        );
        let mut sets = vec![channel(&[bp(2.5, 1.5, 10.0)])];
        if !self.quick() {
            sets.push(SumChannel::iid(bp(2.5, 1.5, 10.0), 2).expect("valid preset"));
            sets.push(channel(&[
                bp(1.0, 5.0, 10.0),
                bp(1.5, 5.0, 10.0),
                bp(2.0, 5.0, 10.0),
            ]));
        }
        for ch in &sets {
            let name = format!("ks_distance_l{}", ch.len());
            // measured against the 1 % critical value, so the threshold is 1
            self.check(
                "oracles",
                &name,
                1.0,
                (|| -> Result<f64> {
                    let samples = simulate_sum(ch, &SimConfig::new(seed, n))?;
                    let opts = EvalOptions::default();
                    let out = ks_test(&samples, |g| cdf_sum(ch, g, &opts).map(|e| e.value()), 200)?;
                    Ok(out.bound() / ks_critical_value(out.n, 0.01))
                })(),
            );
        }
        self.check(
            "oracles",
            "simulation_reproducible",
            0.0,
            (|| -> Result<f64> {
                let ch = channel(&[bp(0.5, 1.25, 1.0), bp(2.5, 50.0, 3.0)]);
                let cfg = SimConfig::new(seed, 10_000);
                let a = simulate_sum(&ch, &cfg)?;
                let b = simulate_sum(&ch, &cfg)?;
                Ok(a.sorted()
                    .iter()
                    .zip(b.sorted())
                    .filter(|(x, y)| x.to_bits() != y.to_bits())
                    .count() as f64)
            })(),
        );
    }

    fn cli(&mut self) {
        let seed = self.seed;
        self.check("cli", "csv_byte_stable", 0.0, (|| -> Result<f64> {
            let text = format!(
                r#"{{"branches": [{{"m": 2.5, "m_s": 1.5, "gamma_bar_db": 0}}, {{"m": 1.5, "m_s": 1.25, "gamma_bar_db": 3}}],
                    "sweep": {{"variable": "gamma_bar_db", "from": 0, "to": 10, "step": 5}},
                    "trials": 5000, "seed": {seed}}}"#
            );
            let sc = ScenarioFile::parse(&text)?.validate()?;
            let run = || -> Result<Vec<u8>> {
                let mut buf = Vec::new();
                write_csv(&mut buf, &[evaluate(&sc, Metric::Op, "")?])?;
                Ok(buf)
            };
            Ok(f64::from(u8::from(run()? != run()?)))
        })());
    }
}

/// Runs the suite. `bpsk_lambda` replaces the BPSK constant wherever the
/// suite uses BPSK; any value other than 1 should make it fail.
pub fn run(level: Level, seed: u64, bpsk_lambda: f64) -> Result<Report> {
    let bpsk = Modulation {
        lambda: bpsk_lambda,
        ..Modulation::BPSK
    };
    let mut suite = Suite {
        level,
        seed,
        bpsk,
        checks: Vec::new(),
    };
    suite.specfun();
    suite.channel();
    suite.sumdist();
    suite.metrics();
    suite.oracles();
    suite.cli();
    let passed = suite.checks.iter().all(|c| c.passed);
    Ok(Report {
        schema: 1,
        level,
        seed,
        bpsk_lambda,
        passed,
        checks: suite.checks,
    })
}

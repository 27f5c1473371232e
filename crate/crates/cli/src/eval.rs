use clap::ValueEnum;
use fsmrc::metrics::{
    ber_asymptotic, ber_quadrature, outage_capacity, outage_probability,
    outage_probability_asymptotic,
};
use fsmrc::oracles::{simulate_ber, simulate_sum, substream_seed, McEstimate, SimConfig};
use fsmrc::sumdist::{cdf_sum, mgf_sum, pdf_sum};
use fsmrc::{db_to_linear, CapacitySpec, Estimate, EvalOptions, SumChannel};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::scenario::{Scenario, SweepVariable};

pub const CONFIDENCE: f64 = 0.95;
/// Half-width of the histogram bin used for the simulated density, relative
/// to the evaluation point.
const PDF_BIN: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Op,
    Oc,
    Ber,
    Pdf,
    Cdf,
    Mgf,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Op => "op",
            Metric::Oc => "oc",
            Metric::Ber => "ber",
            Metric::Pdf => "pdf",
            Metric::Cdf => "cdf",
            Metric::Mgf => "mgf",
        }
    }

    fn accepts(self, v: SweepVariable) -> bool {
        use SweepVariable::*;
        match v {
            GammaBarDb => true,
            GammaThDb => matches!(self, Metric::Op | Metric::Pdf | Metric::Cdf),
            COverW => matches!(self, Metric::Op | Metric::Oc),
            T => self == Metric::Mgf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub sweep_var: SweepVariable,
    pub value: f64,
    pub analytic: f64,
    pub asymptotic: Option<f64>,
    pub mc: Option<McEstimate>,
    pub terms_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub metric: Metric,
    pub rows: Vec<Row>,
}

impl Curve {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

/// Operating point of one sweep entry.
struct Point {
    channel: SumChannel,
    gamma_th: f64,
    c_th_over_w: f64,
    t: f64,
    sweep_var: SweepVariable,
}

impl Point {
    fn new(sc: &Scenario, x: f64) -> Result<Self> {
        let var = sc.sweep.variable;
        let pick = |v: SweepVariable, fixed: f64| if var == v { x } else { fixed };
        Ok(Point {
            channel: sc.channel(pick(SweepVariable::GammaBarDb, 0.0))?,
            gamma_th: db_to_linear(pick(SweepVariable::GammaThDb, sc.gamma_th_db)),
            c_th_over_w: pick(SweepVariable::COverW, sc.c_th_over_w),
            t: pick(SweepVariable::T, sc.t),
            sweep_var: var,
        })
    }

    fn capacity(&self) -> Result<CapacitySpec> {
        Ok(CapacitySpec::new(self.c_th_over_w, 1.0)?)
    }

    /// SNR threshold of an outage event.
    fn outage_threshold(&self, metric: Metric) -> Result<f64> {
        if metric == Metric::Oc || self.sweep_var == SweepVariable::COverW {
            Ok(self.capacity()?.snr_threshold())
        } else {
            Ok(self.gamma_th)
        }
    }
}

/// High-SNR outage asymptote; zero at a zero threshold.
fn outage_asymptote(ch: &SumChannel, th: f64) -> Result<f64> {
    if th == 0.0 {
        Ok(0.0)
    } else {
        Ok(outage_probability_asymptotic(ch, th)?)
    }
}

fn analytic(
    metric: Metric,
    p: &Point,
    sc: &Scenario,
    opts: &EvalOptions,
) -> Result<(Estimate, Option<f64>)> {
    let ch = &p.channel;
    Ok(match metric {
        Metric::Op => {
            let th = p.outage_threshold(metric)?;
            (
                outage_probability(ch, th, opts)?.estimate,
                Some(outage_asymptote(ch, th)?),
            )
        }
        Metric::Oc => {
            let spec = p.capacity()?;
            let asym = outage_asymptote(ch, spec.snr_threshold())?;
            (outage_capacity(ch, &spec, opts)?.estimate, Some(asym))
        }
        Metric::Ber => {
            let r = ber_quadrature(ch, &sc.modulation, &opts.series)?;
            (r.estimate, Some(ber_asymptotic(ch, &sc.modulation)?))
        }
        Metric::Pdf => (pdf_sum(ch, p.gamma_th, opts)?.estimate, None),
        Metric::Cdf => (cdf_sum(ch, p.gamma_th, opts)?.estimate, None),
        Metric::Mgf => (mgf_sum(ch, p.t)?, None),
    })
}

fn simulated(
    metric: Metric,
    p: &Point,
    sc: &Scenario,
    cfg: &SimConfig,
) -> Result<Option<McEstimate>> {
    let ch = &p.channel;
    if metric == Metric::Ber {
        return Ok(Some(simulate_ber(ch, &sc.modulation, cfg)?));
    }
    let samples = simulate_sum(ch, cfg)?;
    let sorted = samples.sorted();
    let n = sorted.len();
    Ok(match metric {
        Metric::Op | Metric::Oc => {
            let th = p.outage_threshold(metric)?;
            Some(McEstimate::proportion(
                sorted.partition_point(|&g| g < th),
                n,
                cfg.confidence,
            ))
        }
        Metric::Cdf => Some(McEstimate::proportion(
            sorted.partition_point(|&g| g <= p.gamma_th),
            n,
            cfg.confidence,
        )),
        Metric::Pdf => {
            let (lo, hi) = (p.gamma_th * (1.0 - PDF_BIN), p.gamma_th * (1.0 + PDF_BIN));
            let hits = sorted.partition_point(|&g| g < hi) - sorted.partition_point(|&g| g < lo);
            let e = McEstimate::proportion(hits, n, cfg.confidence);
            let w = hi - lo;
            Some(McEstimate {
                mean: e.mean / w,
                std_err: e.std_err / w,
                ci_low: e.ci_low / w,
                ci_high: e.ci_high / w,
                n,
            })
        }
        Metric::Mgf => {
            let v: Vec<f64> = sorted.iter().map(|&g| (-p.t * g).exp()).collect();
            Some(McEstimate::from_values(&v, cfg.confidence))
        }
        Metric::Ber => unreachable!(),
    })
}

fn evaluate_point(
    sc: &Scenario,
    metric: Metric,
    idx: usize,
    x: f64,
    opts: &EvalOptions,
) -> Result<Row> {
    let p = Point::new(sc, x)?;
    let (est, asymptotic) = analytic(metric, &p, sc, opts)?;
    let mc = if sc.trials > 0 {
        let mut cfg = SimConfig::new(substream_seed(sc.seed, idx as u64), sc.trials);
        cfg.confidence = CONFIDENCE;
        simulated(metric, &p, sc, &cfg)?
    } else {
        None
    };
    Ok(Row {
        sweep_var: p.sweep_var,
        value: x,
        analytic: est.value,
        asymptotic,
        mc,
        terms_used: est.terms_used,
        converged: est.converged && est.value.is_finite(),
    })
}

/// Evaluates `metric` at every sweep point; rows come back in sweep order.
pub fn evaluate(sc: &Scenario, metric: Metric, label: impl Into<String>) -> Result<Curve> {
    if !metric.accepts(sc.sweep.variable) {
        return Err(CliError::Schema(format!(
            "sweep.variable: metric {} cannot sweep {}",
            metric.name(),
            sc.sweep.variable
        )));
    }
    let opts = EvalOptions::default();
    let rows = sc
        .sweep_values()
        .par_iter()
        .enumerate()
        .map(|(i, &x)| evaluate_point(sc, metric, i, x, &opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(Curve {
        label: label.into(),
        metric,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioFile;

    fn scenario(var: &str, from: f64, to: f64, trials: usize) -> Scenario {
        let text = format!(
            r#"{{"branches": [{{"m": 1, "m_s": 1, "gamma_bar_db": 0}}],
                "sweep": {{"variable": "{var}", "from": {from}, "to": {to}, "step": 1}},
                "trials": {trials}, "seed": 3}}"#
        );
        ScenarioFile::parse(&text).unwrap().validate().unwrap()
    }

    #[test]
    fn unit_case_rows() {
        let sc = scenario("gamma_th_db", 0.0, 0.0, 20_000);
        let cdf = evaluate(&sc, Metric::Cdf, "").unwrap();
        assert!((cdf.rows[0].analytic - 0.5).abs() < 1e-12);
        assert!(cdf.rows[0].mc.unwrap().within_sigmas(0.5, 4.0));
        let pdf = evaluate(&sc, Metric::Pdf, "").unwrap();
        assert!((pdf.rows[0].analytic - 0.25).abs() < 1e-12);
        assert!(pdf.rows[0].mc.unwrap().within_sigmas(0.25, 4.0));
        let op = evaluate(&sc, Metric::Op, "").unwrap();
        assert_eq!(op.rows[0].asymptotic, Some(1.0));
    }

    #[test]
    fn sweeps_map_to_operating_points() {
        let sc = scenario("gamma_bar_db", 0.0, 20.0, 0);
        let op = evaluate(&sc, Metric::Op, "").unwrap();
        assert_eq!(op.rows.len(), 21);
        assert!(op.rows.windows(2).all(|w| w[1].analytic < w[0].analytic));
        assert!(op.rows.iter().all(|r| r.mc.is_none() && r.converged));
        let sc = scenario("c_th_over_w", 0.0, 3.0, 0);
        let oc = evaluate(&sc, Metric::Oc, "").unwrap();
        // 2^c - 1 over a unit branch: P = th / (1 + th)
        for r in &oc.rows {
            let th = 2f64.powf(r.value) - 1.0;
            assert!((r.analytic - th / (1.0 + th)).abs() < 1e-12);
        }
        let sc = scenario("t", 0.0, 2.0, 1000);
        let mgf = evaluate(&sc, Metric::Mgf, "").unwrap();
        assert_eq!(mgf.rows[0].analytic, 1.0);
    }

    #[test]
    fn incompatible_sweep_is_a_schema_error() {
        let sc = scenario("t", 0.0, 2.0, 0);
        assert_eq!(evaluate(&sc, Metric::Ber, "").unwrap_err().exit_code(), 2);
    }
}

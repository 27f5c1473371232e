//! CSV and JSON writers. Both are byte-stable for a fixed input.

use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;

use crate::eval::{Curve, Row};

pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 9] = [
    "sweep_var",
    "value_db_or_linear",
    "metric_analytic",
    "metric_asymptotic",
    "metric_mc",
    "mc_ci_low",
    "mc_ci_high",
    "terms_used",
    "converged",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_line(r: &Row) -> String {
    [
        r.sweep_var.name().to_string(),
        num(r.value),
        num(r.analytic),
        opt(r.asymptotic),
        opt(r.mc.map(|m| m.mean)),
        opt(r.mc.map(|m| m.ci_low)),
        opt(r.mc.map(|m| m.ci_high)),
        r.terms_used.to_string(),
        r.converged.to_string(),
    ]
    .join(",")
}

/// Writes curves as CSV. Multiple curves are separated by `# curve=` lines.
pub fn write_csv<W: Write>(mut w: W, curves: &[Curve]) -> std::io::Result<()> {
    writeln!(w, "# schema={SCHEMA_VERSION}")?;
    if let Some(c) = curves.first() {
        writeln!(w, "# metric={}", c.metric.name())?;
    }
    writeln!(w, "{}", COLUMNS.join(","))?;
    for c in curves {
        if curves.len() > 1 || !c.label.is_empty() {
            writeln!(w, "# curve={}", c.label)?;
        }
        for r in &c.rows {
            writeln!(w, "{}", csv_line(r))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonRow {
    sweep_var: &'static str,
    value_db_or_linear: f64,
    metric_analytic: f64,
    metric_asymptotic: Option<f64>,
    metric_mc: Option<f64>,
    mc_ci_low: Option<f64>,
    mc_ci_high: Option<f64>,
    terms_used: usize,
    converged: bool,
}

#[derive(Serialize)]
struct JsonCurve<'a> {
    label: &'a str,
    metric: &'static str,
    rows: Vec<JsonRow>,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    schema: u32,
    curves: Vec<JsonCurve<'a>>,
}

pub fn write_json<W: Write>(mut w: W, curves: &[Curve]) -> std::io::Result<()> {
    let doc = JsonDoc {
        schema: SCHEMA_VERSION,
        curves: curves
            .iter()
            .map(|c| JsonCurve {
                label: &c.label,
                metric: c.metric.name(),
                rows: c
                    .rows
                    .iter()
                    .map(|r| JsonRow {
                        sweep_var: r.sweep_var.name(),
                        value_db_or_linear: r.value,
                        metric_analytic: r.analytic,
                        metric_asymptotic: r.asymptotic,
                        metric_mc: r.mc.map(|m| m.mean),
                        mc_ci_low: r.mc.map(|m| m.ci_low),
                        mc_ci_high: r.mc.map(|m| m.ci_high),
                        terms_used: r.terms_used,
                        converged: r.converged,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)
}

pub fn write<W: Write>(w: W, format: Format, curves: &[Curve]) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(w, curves),
        Format::Json => write_json(w, curves),
    }
}

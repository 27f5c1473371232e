//! JSON scenario files.
//!
//! ```json
//! {
//!   "branches": [{"m": 2.5, "m_s": 1.5, "gamma_bar_db": 0.0}],
//!   "modulation": "bpsk",
//!   "sweep": {"variable": "gamma_bar_db", "from": 0, "to": 40, "step": 5},
//!   "trials": 100000,
//!   "seed": 7
//! }
//! ```
//!
//! A `gamma_bar_db` sweep adds the swept value to every branch's
//! `gamma_bar_db`. The fixed operating point of the other variables comes
//! from the optional top-level `gamma_th_db`, `c_th_over_w` and `t` fields.

use std::fmt;
use std::path::Path;

use fsmrc::{BranchParams, Modulation, SumChannel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MAX_SWEEP_POINTS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    pub m: f64,
    pub m_s: f64,
    pub gamma_bar_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModulationSpec {
    Label(String),
    Custom(CustomModulation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModulation {
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    GammaBarDb,
    GammaThDb,
    COverW,
    T,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::GammaBarDb => "gamma_bar_db",
            SweepVariable::GammaThDb => "gamma_th_db",
            SweepVariable::COverW => "c_th_over_w",
            SweepVariable::T => "t",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(with = "sweep_variable_name")]
    pub variable: SweepVariable,
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

// `c_th_over_w` does not follow the snake_case spelling of the variant name.
mod sweep_variable_name {
    use super::SweepVariable;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &SweepVariable, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(v.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SweepVariable, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "gamma_bar_db" => Ok(SweepVariable::GammaBarDb),
            "gamma_th_db" => Ok(SweepVariable::GammaThDb),
            "c_th_over_w" => Ok(SweepVariable::COverW),
            "t" => Ok(SweepVariable::T),
            other => Err(D::Error::unknown_variant(
                other,
                &["gamma_bar_db", "gamma_th_db", "c_th_over_w", "t"],
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub branches: Vec<BranchSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<ModulationSpec>,
    pub sweep: SweepSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_th_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_th_over_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub branches: Vec<BranchSpec>,
    pub modulation: Modulation,
    pub sweep: SweepSpec,
    pub trials: usize,
    pub seed: u64,
    pub gamma_th_db: f64,
    pub c_th_over_w: f64,
    pub t: f64,
}

fn schema(path: &str, msg: impl fmt::Display) -> CliError {
    CliError::Schema(format!("{path}: {msg}"))
}

fn finite(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(schema(path, "must be a finite number"))
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Schema(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Schema(msg) => CliError::Schema(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<Scenario> {
        if self.branches.is_empty() {
            return Err(schema("branches", "at least one branch is required"));
        }
        for (i, b) in self.branches.iter().enumerate() {
            for (name, v) in [("m", b.m), ("m_s", b.m_s)] {
                let path = format!("branches[{i}].{name}");
                if !(finite(&path, v)? > 0.0) {
                    return Err(schema(&path, "must be positive"));
                }
            }
            finite(&format!("branches[{i}].gamma_bar_db"), b.gamma_bar_db)?;
        }
        let modulation = match &self.modulation {
            None => Modulation::BPSK,
            Some(ModulationSpec::Label(s)) => Modulation::from_label(s).ok_or_else(|| {
                schema(
                    "modulation",
                    format!("unknown label {s:?}; expected bpsk, bfsk or bfsk_min_corr"),
                )
            })?,
            Some(ModulationSpec::Custom(c)) => {
                Modulation::custom(finite("modulation.lambda", c.lambda)?)
                    .map_err(|_| schema("modulation.lambda", "must be positive"))?
            }
        };
        let s = &self.sweep;
        finite("sweep.from", s.from)?;
        finite("sweep.to", s.to)?;
        if !(finite("sweep.step", s.step)? > 0.0) {
            return Err(schema("sweep.step", "must be positive"));
        }
        if s.to < s.from {
            return Err(schema("sweep.to", "sweep range is empty (to < from)"));
        }
        if sweep_len(s) > MAX_SWEEP_POINTS {
            return Err(schema(
                "sweep",
                format!("more than {MAX_SWEEP_POINTS} points"),
            ));
        }
        let c_th_over_w = finite("c_th_over_w", self.c_th_over_w.unwrap_or(1.0))?;
        if c_th_over_w < 0.0 {
            return Err(schema("c_th_over_w", "must be non-negative"));
        }
        let t = finite("t", self.t.unwrap_or(1.0))?;
        if t < 0.0 {
            return Err(schema("t", "must be non-negative"));
        }
        let sc = Scenario {
            branches: self.branches.clone(),
            modulation,
            sweep: s.clone(),
            trials: self.trials.unwrap_or(0),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            gamma_th_db: finite("gamma_th_db", self.gamma_th_db.unwrap_or(0.0))?,
            c_th_over_w,
            t,
        };
        match s.variable {
            SweepVariable::COverW if s.from < 0.0 => {
                Err(schema("sweep.from", "c_th_over_w must be non-negative"))
            }
            SweepVariable::T if s.from < 0.0 => Err(schema("sweep.from", "t must be non-negative")),
            _ => Ok(sc),
        }
    }
}

fn sweep_len(s: &SweepSpec) -> usize {
    // tolerate rounding in (to - from) / step
    let n = ((s.to - s.from) / s.step * (1.0 + 1e-12) + 1e-9).floor();
    if n.is_finite() && n >= 0.0 {
        (n as usize).saturating_add(1)
    } else {
        usize::MAX
    }
}

impl Scenario {
    pub fn sweep_values(&self) -> Vec<f64> {
        let s = &self.sweep;
        (0..sweep_len(s))
            .map(|k| s.from + k as f64 * s.step)
            .collect()
    }

    /// The channel with every branch shifted by `offset_db`.
    pub fn channel(&self, offset_db: f64) -> Result<SumChannel> {
        let branches = self
            .branches
            .iter()
            .map(|b| BranchParams::from_db(b.m, b.m_s, b.gamma_bar_db + offset_db))
            .collect::<fsmrc::Result<Vec<_>>>()?;
        Ok(SumChannel::new(branches)?)
    }

    pub fn to_file(&self) -> ScenarioFile {
        let modulation = Some(match Modulation::from_label(self.modulation.label()) {
            Some(m) if m == self.modulation => ModulationSpec::Label(m.label().to_string()),
            _ => ModulationSpec::Custom(CustomModulation {
                lambda: self.modulation.lambda,
            }),
        });
        ScenarioFile {
            branches: self.branches.clone(),
            modulation,
            sweep: self.sweep.clone(),
            trials: Some(self.trials),
            seed: Some(self.seed),
            gamma_th_db: Some(self.gamma_th_db),
            c_th_over_w: Some(self.c_th_over_w),
            t: Some(self.t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"{
        "branches": [{"m": 2.5, "m_s": 1.5, "gamma_bar_db": 0}],
        "modulation": "bpsk",
        "sweep": {"variable": "gamma_bar_db", "from": 0, "to": 40, "step": 5}
    }"#;

    #[test]
    fn parses_and_defaults() {
        let sc = ScenarioFile::parse(FIG1).unwrap().validate().unwrap();
        assert_eq!(sc.sweep_values().len(), 9);
        assert_eq!(sc.sweep_values()[8], 40.0);
        assert_eq!(sc.trials, 0);
        assert_eq!(sc.modulation, Modulation::BPSK);
        assert_eq!(sc.gamma_th_db, 0.0);
    }

    #[test]
    fn custom_modulation_and_round_trip() {
        let text = FIG1.replace("\"bpsk\"", "{\"lambda\": 0.3}");
        let sc = ScenarioFile::parse(&text).unwrap().validate().unwrap();
        assert_eq!(sc.modulation.lambda, 0.3);
        let again = sc.to_file().validate().unwrap();
        assert_eq!(again, sc);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad_m = FIG1.replace("\"m\": 2.5", "\"m\": -1");
        let e = ScenarioFile::parse(&bad_m).unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("branches[0].m"), "{e}");
        let unknown = FIG1.replace("\"modulation\"", "\"modulaton\"");
        let e = ScenarioFile::parse(&unknown).unwrap_err();
        assert!(e.to_string().contains("line"), "{e}");
        let empty = FIG1.replace("\"to\": 40", "\"to\": -1");
        let e = ScenarioFile::parse(&empty).unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("sweep.to"), "{e}");
        let zero_step = FIG1.replace("\"step\": 5", "\"step\": 0");
        assert_eq!(
            ScenarioFile::parse(&zero_step)
                .unwrap()
                .validate()
                .unwrap_err()
                .exit_code(),
            2
        );
    }
}

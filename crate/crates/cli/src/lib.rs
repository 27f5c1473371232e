//! Command-line front end for `fsmrc`: scenario files, metric sweeps,
//! figure presets and the built-in self-test.

pub mod error;
pub mod eval;
pub mod figures;
pub mod output;
pub mod scenario;
pub mod selftest;

pub use error::{CliError, Result};
pub use eval::{evaluate, Curve, Metric, Row};
pub use output::Format;
pub use scenario::{Scenario, ScenarioFile};

/// Fails with a numeric error when any row is unconverged or NaN.
pub fn require_converged(curves: &[Curve]) -> Result<()> {
    let bad: Vec<String> = curves
        .iter()
        .flat_map(|c| {
            c.rows.iter().filter(|r| !r.converged).map(move |r| {
                format!(
                    "{}{}={}",
                    if c.label.is_empty() {
                        String::new()
                    } else {
                        format!("{}: ", c.label)
                    },
                    r.sweep_var,
                    r.value
                )
            })
        })
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "unconverged rows at {}",
            bad.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::SweepVariable;

    #[test]
    fn unconverged_rows_are_numeric_errors() {
        let row = Row {
            sweep_var: SweepVariable::T,
            value: 2.0,
            analytic: f64::NAN,
            asymptotic: None,
            mc: None,
            terms_used: 0,
            converged: false,
        };
        let mut curve = Curve {
            label: "x".into(),
            metric: Metric::Mgf,
            rows: vec![row],
        };
        let e = require_converged(std::slice::from_ref(&curve)).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("x: t=2"), "{e}");
        curve.rows[0].converged = true;
        assert!(require_converged(&[curve]).is_ok());
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fsmrc::oracles::{draw_sums, SimConfig};
use fsmrc_cli::figures::figure;
use fsmrc_cli::scenario::DEFAULT_SEED;
use fsmrc_cli::selftest::{self, Level};
use fsmrc_cli::{
    evaluate, output, require_converged, CliError, Format, Metric, Result, ScenarioFile,
};

#[derive(Parser)]
#[command(
    name = "fsmrc",
    version,
    about = "Sums of F fading variates and MRC receiver performance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a metric over the sweep of a scenario file.
    Eval {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
        /// Monte Carlo trials per sweep point; overrides the scenario.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run the built-in validation suite and print a JSON report.
    Selftest {
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true, default_value_t = 1.0)]
        tamper_bpsk_lambda: f64,
    },
    /// Reproduce the data behind figure 1, 2 or 3.
    Figure {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=3))]
        number: u32,
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Dump simulated combined-SNR variates (linear), one per line.
    Sample {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Eval {
            scenario,
            metric,
            trials,
            seed,
            out,
            format,
        } => {
            let mut sc = ScenarioFile::load(&scenario)?.validate()?;
            if let Some(t) = trials {
                sc.trials = t;
            }
            if let Some(s) = seed {
                sc.seed = s;
            }
            let curves = [evaluate(&sc, metric, "")?];
            let mut w = sink(out.as_deref())?;
            output::write(&mut w, format, &curves)?;
            w.flush()?;
            require_converged(&curves)
        }
        Command::Selftest {
            quick,
            seed,
            out,
            tamper_bpsk_lambda,
        } => {
            let level = if quick { Level::Quick } else { Level::Full };
            let report = selftest::run(level, seed, tamper_bpsk_lambda)?;
            let mut w = sink(out.as_deref())?;
            w.write_all(report.to_json().as_bytes())?;
            w.flush()?;
            if report.passed {
                Ok(())
            } else {
                Err(CliError::SelftestFailed(report.failed().join(", ")))
            }
        }
        Command::Figure {
            number,
            quick,
            trials,
            seed,
            out,
            format,
        } => {
            let fig = figure(number, quick, trials, seed)?;
            let curves = fig
                .curves
                .iter()
                .map(|(label, sc)| evaluate(sc, fig.metric, label.as_str()))
                .collect::<Result<Vec<_>>>()?;
            let mut w = sink(out.as_deref())?;
            output::write(&mut w, format, &curves)?;
            w.flush()?;
            require_converged(&curves)
        }
        Command::Sample {
            scenario,
            trials,
            seed,
            out,
        } => {
            let sc = ScenarioFile::load(&scenario)?.validate()?;
            let ch = sc.channel(0.0)?;
            let draws = draw_sums(&ch, &SimConfig::new(seed.unwrap_or(sc.seed), trials))?;
            let mut w = sink(out.as_deref())?;
            for g in draws {
                writeln!(w, "{g:e}")?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fsmrc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

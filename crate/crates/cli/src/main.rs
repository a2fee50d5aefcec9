//! `aoii` — expected Age of Incorrect Information of threshold policies
//! under random transmission delay, exactly and by simulation.
//!
//! Modes: `analytic`, `simulate`, `compare` (z-scores, nonzero exit past 3
//! sigma), `sweep` (adds an SVG chart), `verify` (oracle suites). See the
//! README for the CSV schema and the config-file format.

mod runner;
mod spec;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::spec::{parse_config_file, resolve, Mode, RawOptions};

#[derive(Parser)]
#[command(
    name = "aoii",
    version,
    about = "Expected AoII of threshold policies under random transmission delay"
)]
struct Cli {
    /// Flat key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,

    /// analytic | simulate | compare | sweep | verify.
    #[arg(long, value_enum)]
    mode: Option<Mode>,

    /// Delay truncation mode: a1 (capped, always delivered) or a2
    /// (discarded past t_max).
    #[arg(long)]
    assumption: Option<String>,

    /// Delay law: `geometric:<p_s>`, `zipf:<a>` or `file:<path>`.
    #[arg(long)]
    delay: Option<String>,

    /// Delay support cap in slots (ignored for file: delays).
    #[arg(long)]
    tmax: Option<usize>,

    /// Comma-separated source flip probabilities, each in (0, 0.5].
    #[arg(long)]
    p: Option<String>,

    /// Comma-separated thresholds; "inf" is the never-transmit policy.
    #[arg(long)]
    tau: Option<String>,

    /// Monte Carlo runs per grid point.
    #[arg(long)]
    runs: Option<u32>,

    /// Slots per run.
    #[arg(long)]
    epochs: Option<u64>,

    /// RNG seed (default: env AOII_SEED, else 0).
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory for CSV/SVG/trace artifacts.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write one per-slot sample-path trace per grid point.
    #[arg(long)]
    trace: bool,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();

    let from_flags = RawOptions {
        mode: None,
        assumption: cli.assumption,
        delay: cli.delay,
        tmax: cli.tmax,
        p: cli.p,
        tau: cli.tau,
        runs: cli.runs,
        epochs: cli.epochs,
        seed: cli.seed,
        out: cli.out,
        trace: if cli.trace { Some(true) } else { None },
    };
    let merged = match &cli.config {
        Some(path) => from_flags.or(parse_config_file(path)?),
        None => from_flags,
    };
    let spec = resolve(merged, cli.mode)?;
    run_experiment(&spec)
}

/// Execute one resolved experiment: evaluate the grid (or the verify
/// suites), write artifacts, and map invariant failures to a nonzero exit.
fn run_experiment(spec: &spec::ExperimentSpec) -> Result<ExitCode, String> {
    match spec.mode {
        Mode::Verify => {
            let suites = verify::run_verify(spec)?;
            let stdout = std::io::stdout();
            let all_pass =
                verify::print_table(&suites, &mut stdout.lock()).map_err(|e| e.to_string())?;
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        _ => {
            let rows = runner::evaluate_grid(spec)?;
            let written = runner::write_artifacts(spec, &rows)?;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            runner::print_summary(spec, &rows, &mut out).map_err(|e| e.to_string())?;
            for path in &written {
                use std::io::Write;
                writeln!(out, "wrote {}", path.display()).map_err(|e| e.to_string())?;
            }

            if spec.mode == Mode::Compare {
                if let Some(bad) = rows.iter().find(|r| r.z_score().is_some_and(|z| z > 3.0)) {
                    eprintln!(
                        "z-score invariant failed: p={}, tau={}, analytic={}, sim={}, z={:.3}",
                        bad.p,
                        bad.tau,
                        bad.analytic
                            .as_ref()
                            .map(|a| a.expected_aoii)
                            .unwrap_or(f64::NAN),
                        bad.sim.as_ref().map(|s| s.mean_aoii).unwrap_or(f64::NAN),
                        bad.z_score().unwrap_or(f64::NAN)
                    );
                    return Ok(ExitCode::FAILURE);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

//! `amc`: run, sweep, check and analyze analog matrix computing scenarios.

mod check;
mod runner;
mod scenario;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use scenario::{Resolved, Scenario};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "AMC_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "amc-out";

const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_SIM_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "amc",
    version,
    about = "Analog matrix computing circuit simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: scenario `out_dir`, then $AMC_OUT_DIR, then ./amc-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and compare against the reference solution.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Re-run a scenario over values of one numeric field.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Field to vary (e.g. delta, max_row_sum, bits, l0).
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Validate a scenario and predict stability without simulating.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Print the circuit poles.
    Poles {
        #[command(flatten)]
        common: Common,
    },
}

/// Failure classes, each with its own exit code.
enum Failure {
    Invalid(anyhow::Error),
    Simulation(anyhow::Error),
}

fn invalid<T>(r: Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Invalid)
}

fn load(common: &Common) -> Result<Resolved, Failure> {
    load_with(common, Scenario::load)
}

fn load_with(common: &Common, f: fn(&Path) -> Result<Resolved>) -> Result<Resolved, Failure> {
    let mut r = invalid(f(&common.scenario))?;
    if let Some(seed) = common.seed {
        r.scenario.sim.seed = seed;
    }
    Ok(r)
}

fn out_dir(common: &Common, r: &Resolved) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| {
            r.scenario.out_dir.as_ref().map(|p| {
                if p.is_absolute() {
                    p.clone()
                } else {
                    common.scenario.parent().unwrap_or(Path::new(".")).join(p)
                }
            })
        })
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, dir.join(name))
        .with_context(|| format!("renaming into {}", dir.join(name).display()))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn cmd_run(common: &Common) -> Result<bool, Failure> {
    let start = Instant::now();
    let r = load(common)?;
    let prepared = invalid(runner::prepare(&r))?;
    let out = runner::execute(&r, prepared).map_err(Failure::Simulation)?;
    let dir = out_dir(common, &r);
    write_atomic(&dir, "trajectory.csv", &out.trajectory.to_csv()).map_err(Failure::Simulation)?;
    write_atomic(&dir, "report.json", &to_json(&out.report)).map_err(Failure::Simulation)?;
    let rep = &out.report;
    eprintln!(
        "{}: relative error {:.3e} (tol {:.1e}), verdict {:?}, settle {}, wall clock {:.3} s -> {}",
        if rep.passed { "PASS" } else { "FAIL" },
        rep.relative_error,
        rep.tolerance,
        rep.poles.verdict,
        rep.settle_time_s
            .map(|t| format!("{t:.4e} s"))
            .unwrap_or_else(|| "n/a".into()),
        start.elapsed().as_secs_f64(),
        dir.display()
    );
    Ok(rep.passed)
}

fn cmd_sweep(common: &Common, axis: &str, values: &str) -> Result<bool, Failure> {
    let start = Instant::now();
    let r = load(common)?;
    let values = invalid(sweep::parse_values(values))?;
    let plan = invalid(sweep::plan(&r, axis, &values))?;
    let report = sweep::run(axis, &values, &plan).map_err(Failure::Simulation)?;
    let dir = out_dir(common, &r);
    write_atomic(&dir, "sweep.json", &to_json(&report)).map_err(Failure::Simulation)?;
    write_atomic(&dir, "sweep.csv", &report.to_csv()).map_err(Failure::Simulation)?;
    eprintln!(
        "{}: {} points over `{axis}`, wall clock {:.3} s -> {}",
        if report.passed() { "PASS" } else { "FAIL" },
        report.points.len(),
        start.elapsed().as_secs_f64(),
        dir.display()
    );
    Ok(report.passed())
}

fn cmd_check(common: &Common) -> Result<bool, Failure> {
    let r = load_with(common, Scenario::parse)?;
    let report = check::check(&r);
    print!("{}", to_json(&report));
    Ok(report.ok())
}

fn cmd_poles(common: &Common) -> Result<bool, Failure> {
    let r = load(common)?;
    let (sys, _) = invalid(runner::build_system(&r))?;
    let report = invalid(amc_core::stability::poles(&sys).map_err(Into::into))?;
    print!("{}", to_json(&report));
    Ok(report.verdict != amc_core::Verdict::Unstable
        || sys.topology == amc_core::Topology::Eigenvector)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { common } => cmd_run(common),
        Command::Sweep {
            common,
            axis,
            values,
        } => cmd_sweep(common, axis, values),
        Command::Check { common } => cmd_check(common),
        Command::Poles { common } => cmd_poles(common),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(Failure::Invalid(e)) => {
            eprintln!("invalid scenario: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Simulation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_SIM_ERROR)
        }
    }
}

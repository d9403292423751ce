//! Scenario execution: map, build, analyze, simulate, compare.

use amc_core::circuits::{
    build_eigenvector, build_inversion, build_inversion_split, build_mvm, build_mvm_split_col,
    build_mvm_split_row, build_pinv_left, build_pinv_right, EigenSign, TiaConfig, Topology,
};
use amc_core::device::{
    map_matrix, program_with_verify, quantize, ConductanceMatrix, MappedSplit, ProgramStats,
    Provenance,
};
use amc_core::dynamics::{
    eigen_horizon, integrate, measure_eigen_result, random_initial_state, settle_time, stable_step,
    steady_state, IntegrateOptions, Trajectory, EIGEN_START_AMPLITUDE,
};
use amc_core::matrix::split_canonical;
use amc_core::oracle::{self, OracleMethod, OracleResult, OracleValue};
use amc_core::stability::{poles, PoleReport, Verdict};
use amc_core::CircuitSystem;
use anyhow::{anyhow, Context, Result};
use serde::Serialize;

use crate::scenario::Resolved;

/// Target number of rows in an automatically strided trajectory.
const TRAJECTORY_ROWS: f64 = 5000.0;

#[derive(Debug, Clone, Serialize)]
pub struct DeviceSummary {
    pub provenance: Provenance,
    pub arrays: usize,
    pub levels: u32,
    /// Largest relative deviation of a programmed cell from its ideal value.
    pub max_relative_deviation: f64,
    pub program: Option<ProgramStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenSummary {
    pub lambda_mapped: f64,
    pub lambda_reference: f64,
    pub rayleigh: f64,
    pub angle_deg: f64,
    pub amplitude_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub topology: Topology,
    pub shape: [usize; 2],
    pub seed: u64,
    pub t_end_s: f64,
    /// Circuit result read at the end of the transient, in matrix units
    /// (MVM outputs are rescaled by `g_f/g0`).
    pub result: Vec<f64>,
    /// Equilibrium of the linear circuit model, same units as `result`;
    /// absent for the self-sustained eigenvector circuit.
    pub steady_state: Option<Vec<f64>>,
    pub oracle: OracleResult,
    /// `‖result − oracle‖ / ‖oracle‖`; for eigenvectors both sides are
    /// unit-normalized and sign-aligned first.
    pub relative_error: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
    pub settle_time_s: Option<f64>,
    pub poles: PoleReport,
    pub eigen: Option<EigenSummary>,
    pub device: DeviceSummary,
    pub passed: bool,
}

pub struct RunOutput {
    pub report: RunReport,
    pub trajectory: Trajectory,
}

enum Mapped {
    Single(ConductanceMatrix),
    Split(MappedSplit),
}

fn relative_deviation(got: &ConductanceMatrix, ideal: &ConductanceMatrix) -> f64 {
    got.g
        .entries()
        .iter()
        .zip(ideal.g.entries())
        .filter(|(_, t)| **t != 0.0)
        .map(|(g, t)| ((g - t) / t).abs())
        .fold(0.0, f64::max)
}

fn apply_device(
    r: &Resolved,
    ideal: ConductanceMatrix,
    seed: u64,
    stats: &mut Option<ProgramStats>,
) -> Result<ConductanceMatrix> {
    let mut gm = ideal;
    if r.scenario.device.quantize {
        gm = quantize(&gm).context("quantizing")?;
    }
    if r.scenario.device.program {
        let (p, s) = program_with_verify(&gm, seed).context("programming")?;
        let acc = stats.get_or_insert_with(ProgramStats::default);
        acc.total_iterations += s.total_iterations;
        acc.programmed_cells += s.programmed_cells;
        acc.clamp_events += s.clamp_events;
        gm = p;
    }
    Ok(gm)
}

/// Maps the operand onto devices: the array for single-array circuits
/// (holding `Aᵀ` for the right inverse), the `A⁺`/`A⁻` pair otherwise.
fn map_devices(r: &Resolved) -> Result<(Mapped, DeviceSummary)> {
    let cfg = r.scenario.device.config();
    let seed = r.scenario.sim.seed;
    let mut stats = None;
    let stored = if r.topology() == Topology::PinvRight {
        r.matrix.transpose()
    } else {
        r.matrix.clone()
    };
    let (mapped, deviation, arrays) = if r.topology().uses_split() {
        let ideal = MappedSplit::map(&split_canonical(&stored), &cfg)
            .map_err(|e| anyhow!("matrix: {e}"))?;
        let plus = apply_device(r, ideal.plus.clone(), seed, &mut stats)?;
        let minus = apply_device(r, ideal.minus.clone(), seed.wrapping_add(1), &mut stats)?;
        let dev =
            relative_deviation(&plus, &ideal.plus).max(relative_deviation(&minus, &ideal.minus));
        (Mapped::Split(MappedSplit { plus, minus }), dev, 2)
    } else {
        let ideal = map_matrix(&stored, &cfg).map_err(|e| anyhow!("matrix: {e}"))?;
        let gm = apply_device(r, ideal.clone(), seed, &mut stats)?;
        let dev = relative_deviation(&gm, &ideal);
        (Mapped::Single(gm), dev, 1)
    };
    let provenance = match &mapped {
        Mapped::Single(g) => g.provenance,
        Mapped::Split(s) => s.plus.provenance,
    };
    Ok((
        mapped,
        DeviceSummary {
            provenance,
            arrays,
            levels: cfg.levels,
            max_relative_deviation: deviation,
            program: stats,
        },
    ))
}

/// Feedback conductance: the scenario value, else one that keeps the
/// outputs of a unit input inside the rails.
fn feedback(r: &Resolved) -> Result<TiaConfig> {
    let g0 = r.scenario.device.g0_siemens;
    let g = match r.scenario.tia_g_f_siemens {
        Some(g) => g,
        None => match r.topology() {
            Topology::PinvLeft | Topology::PinvRight => g0,
            _ => {
                g0 * r
                    .matrix
                    .map(f64::abs)
                    .row_sums()
                    .into_iter()
                    .fold(1.0, f64::max)
            }
        },
    };
    TiaConfig::new(g).map_err(|e| anyhow!("tia_g_f_siemens: {e}"))
}

fn reference_eigenpair(r: &Resolved) -> Result<OracleResult> {
    let a = &r.matrix;
    match r.scenario.sign {
        EigenSign::Positive => oracle::power_iteration(a, 1e-11, 1_000_000, 7),
        EigenSign::Negative => oracle::most_negative_eigenpair(a, 1e-11, 1_000_000, 7),
    }
    .map_err(|e| anyhow!("matrix: no reference eigenpair: {e}"))
}

/// The mapped eigenvalue for an eigenvector scenario.
pub fn lambda_mapped(r: &Resolved) -> Result<f64> {
    if let Some(l) = r.scenario.lambda_mapped {
        return Ok(l);
    }
    let delta = r.scenario.delta.expect("validated");
    let lam = reference_eigenpair(r)?.lambda().expect("eigenpair");
    Ok(lam.abs() * (1.0 - delta))
}

pub fn build_system(r: &Resolved) -> Result<(CircuitSystem, DeviceSummary)> {
    let (mapped, device) = map_devices(r)?;
    let oa = r.oa();
    let oa2 = r.second_oa();
    let input = &r.scenario.input;
    let sys = match (r.topology(), &mapped) {
        (Topology::Mvm, Mapped::Single(gm)) => {
            // inputs are applied inverted so the TIA reads out +A·x
            let neg: Vec<f64> = input.iter().map(|v| -v).collect();
            build_mvm(gm, &neg, feedback(r)?, oa)
        }
        (Topology::MvmSplitCol, Mapped::Split(s)) => {
            build_mvm_split_col(s, input, feedback(r)?, oa)
        }
        (Topology::MvmSplitRow, Mapped::Split(s)) => {
            build_mvm_split_row(s, input, feedback(r)?, oa)
        }
        (Topology::Inversion, Mapped::Single(gm)) => build_inversion(gm, input, oa),
        (Topology::InversionSplit, Mapped::Split(s)) => build_inversion_split(s, input, oa, oa2),
        (Topology::PinvLeft, Mapped::Single(gm)) => {
            build_pinv_left(gm, input, feedback(r)?, oa, oa2)
        }
        (Topology::PinvRight, Mapped::Single(gm)) => {
            build_pinv_right(gm, input, feedback(r)?, oa, oa2)
        }
        (Topology::Eigenvector, Mapped::Single(gm)) => {
            build_eigenvector(gm, lambda_mapped(r)?, r.scenario.sign, oa, oa2)
        }
        _ => unreachable!("mapping follows the topology"),
    }
    .context("building circuit")?;
    Ok((sys, device))
}

pub fn oracle_for(r: &Resolved) -> Result<OracleResult> {
    let a = &r.matrix;
    let y = &r.scenario.input;
    let res = match r.topology() {
        Topology::Mvm | Topology::MvmSplitCol | Topology::MvmSplitRow => {
            oracle::mvm(a, y).map(|v| OracleResult {
                value: OracleValue::Vector(v),
                residual: 0.0,
                method: OracleMethod::DenseMvm,
            })
        }
        Topology::Inversion | Topology::InversionSplit => oracle::solve(a, y),
        Topology::PinvLeft if a.is_square() => oracle::solve(a, y),
        Topology::PinvLeft => oracle::pinv_left_solve(a, y),
        Topology::PinvRight if a.is_square() => oracle::solve(a, y),
        Topology::PinvRight => oracle::pinv_right_solve(a, y),
        Topology::Eigenvector => return reference_eigenpair(r),
    };
    res.map_err(|e| anyhow!("oracle: {e}"))
}

/// Converts circuit outputs to matrix units.
fn output_scale(r: &Resolved, sys: &CircuitSystem) -> f64 {
    match (r.topology().is_mvm(), sys.meta.g_f) {
        (true, Some(g_f)) => g_f / r.scenario.device.g0_siemens,
        _ => 1.0,
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_error(got: &[f64], want: &[f64]) -> f64 {
    let d: Vec<f64> = got.iter().zip(want).map(|(a, b)| a - b).collect();
    norm(&d) / norm(want)
}

/// Distance between unit directions, with the sign of `got` aligned to `want`.
fn direction_error(got: &[f64], want: &[f64]) -> f64 {
    let (ng, nw) = (norm(got), norm(want));
    if ng == 0.0 {
        return 1.0;
    }
    let dot: f64 = got.iter().zip(want).map(|(a, b)| a * b).sum();
    let s = if dot < 0.0 { -1.0 } else { 1.0 };
    let d: Vec<f64> = got
        .iter()
        .zip(want)
        .map(|(a, b)| s * a / ng - b / nw)
        .collect();
    norm(&d)
}

fn horizon(r: &Resolved, sys: &CircuitSystem, report: &PoleReport) -> Result<f64> {
    let f = sys.oa().f_gbwp;
    let auto = if sys.topology == Topology::Eigenvector {
        eigen_horizon(sys).map_err(|e| anyhow!("lambda_mapped: {e}"))?
    } else {
        match (report.verdict, report.dominant) {
            (Verdict::Stable, _) => 5.0 * report.bound_time.expect("stable circuits have a bound"),
            // growth limited to e^10 so the record stays finite
            (Verdict::Unstable, Some(d)) => 10.0 / d.re,
            _ => 1000.0 / f,
        }
    };
    Ok(match r.scenario.sim.t_end_s {
        Some(t) if report.verdict == Verdict::Unstable && sys.topology != Topology::Eigenvector => {
            t.min(auto)
        }
        Some(t) => t,
        None => auto,
    })
}

/// Everything that can be decided without simulating. Failures here are
/// problems with the scenario itself.
pub struct Prepared {
    pub sys: CircuitSystem,
    pub device: DeviceSummary,
    pub poles: PoleReport,
    pub oracle: OracleResult,
    pub t_end: f64,
}

pub fn prepare(r: &Resolved) -> Result<Prepared> {
    let (sys, device) = build_system(r)?;
    let poles = poles(&sys).context("pole analysis")?;
    let oracle = oracle_for(r)?;
    let t_end = horizon(r, &sys, &poles)?;
    Ok(Prepared {
        sys,
        device,
        poles,
        oracle,
        t_end,
    })
}

pub fn execute(r: &Resolved, p: Prepared) -> Result<RunOutput> {
    let Prepared {
        sys,
        device,
        poles: pole_report,
        oracle,
        t_end,
    } = p;

    let stride = match r.scenario.sim.record_stride {
        Some(s) => s,
        None => {
            let dt = stable_step(&sys.j, IntegrateOptions::default().dt_factor)?
                .unwrap_or(t_end / 1000.0);
            ((t_end / dt / TRAJECTORY_ROWS).ceil() as usize).max(1)
        }
    };
    let opts = IntegrateOptions {
        record_stride: stride,
        ..Default::default()
    };
    let seed = r.scenario.sim.seed;
    let x0 = if sys.topology == Topology::Eigenvector {
        random_initial_state(sys.state_dim, seed, EIGEN_START_AMPLITUDE)
    } else {
        vec![0.0; sys.state_dim]
    };
    let trajectory = integrate(&sys, t_end, &x0, &opts).context("simulating")?;

    let scale = output_scale(r, &sys);
    let to_units = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| x * scale).collect() };
    let settle_tol = r.scenario.sim.settle_tol;
    let (result, steady, settle, eigen, err) = if sys.topology == Topology::Eigenvector {
        let m = measure_eigen_result(&trajectory, &sys)
            .map_err(|e| anyhow!("eigenvector output did not settle within t_end ({e})"))?;
        let settle =
            settle_time(&trajectory, &m.output, settle_tol, &sys.output_indices)?.settle_time;
        let err = direction_error(&m.output, oracle.vector());
        let summary = EigenSummary {
            lambda_mapped: sys.meta.lambda_mapped.expect("eigenvector meta"),
            lambda_reference: m.lambda_reference,
            rayleigh: m.rayleigh,
            angle_deg: m.angle_to_dominant.to_degrees(),
            amplitude_ratio: m.amplitude_ratio,
        };
        (m.output, None, settle, Some(summary), err)
    } else {
        let eq = steady_state(&sys).context("solving the circuit equilibrium")?;
        let settle = if norm(&eq) > 0.0 {
            settle_time(&trajectory, &eq, settle_tol, &sys.output_indices)?.settle_time
        } else {
            None
        };
        let result = to_units(sys.output(trajectory.last_state()));
        let want = oracle.vector();
        let err = if norm(want) > 0.0 {
            relative_error(&result, want)
        } else {
            norm(&result)
        };
        (result, Some(to_units(eq)), settle, None, err)
    };

    let tolerance = r.scenario.sim.tol;
    let within = err <= tolerance;
    // The eigenvector loop only works while a mode grows.
    let verdict_ok = match r.topology() {
        Topology::Eigenvector => pole_report.verdict == Verdict::Unstable,
        _ => pole_report.verdict != Verdict::Unstable,
    };
    let passed = within && verdict_ok;
    let report = RunReport {
        topology: sys.topology,
        shape: [r.matrix.rows(), r.matrix.cols()],
        seed,
        t_end_s: t_end,
        result,
        steady_state: steady,
        oracle,
        relative_error: err,
        tolerance,
        within_tolerance: within,
        settle_time_s: settle,
        poles: pole_report,
        eigen,
        device,
        passed,
    };
    Ok(RunOutput { report, trajectory })
}

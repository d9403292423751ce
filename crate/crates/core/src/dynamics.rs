//! Transient simulation of [`CircuitSystem`]s and settling analysis.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{CircuitSystem, EigenSign, Topology};
use crate::error::{AmcError, Result};
use crate::matrix::{eigenvalues, Matrix};
use crate::oracle::{self, norm2};

/// Default relative settling criterion (1%).
pub const SETTLE_TOL: f64 = 0.01;

/// Amplitude of the seeded random start used for self-sustained circuits.
pub const EIGEN_START_AMPLITUDE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Sample times (s), strictly increasing, starting at 0.
    pub times: Vec<f64>,
    /// Full state vectors (V).
    pub states: Vec<Vec<f64>>,
    /// Whether any saturating state hit a rail during the step ending at the
    /// sample.
    pub clamped: Vec<bool>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory has at least one sample")
    }

    /// CSV with header `t,s0,s1,...`.
    pub fn to_csv(&self) -> String {
        let dim = self.states.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 0..dim {
            let _ = write!(out, ",s{i}");
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t:e}");
            for v in s {
                let _ = write!(out, ",{v:e}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    /// Step size as a fraction of the fastest time constant `1/max|λ(J)|`.
    pub dt_factor: f64,
    /// Explicit step size; overrides `dt_factor` when set.
    pub dt: Option<f64>,
    pub max_steps: u64,
    /// Record every `record_stride`-th step (the final step is always kept).
    pub record_stride: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            dt_factor: 0.1,
            dt: None,
            max_steps: 20_000_000,
            record_stride: 1,
        }
    }
}

/// Borrowed view of linear dynamics with optional rail clamping.
#[derive(Debug, Clone, Copy)]
pub struct LinearDynamics<'a> {
    pub j: &'a Matrix,
    pub drive: &'a [f64],
    pub sat_mask: &'a [bool],
    pub v_sat: f64,
}

impl<'a> From<&'a CircuitSystem> for LinearDynamics<'a> {
    fn from(sys: &'a CircuitSystem) -> Self {
        Self {
            j: &sys.j,
            drive: &sys.drive,
            sat_mask: &sys.sat_mask,
            v_sat: sys.v_sat,
        }
    }
}

impl LinearDynamics<'_> {
    fn dim(&self) -> usize {
        self.drive.len()
    }

    /// `J·x + drive`, with the outward derivative of a railed state zeroed.
    fn rhs(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut d = self.drive[i];
            for (a, b) in self.j.row(i).iter().zip(x) {
                d += a * b;
            }
            if self.sat_mask[i]
                && ((x[i] >= self.v_sat && d > 0.0) || (x[i] <= -self.v_sat && d < 0.0))
            {
                d = 0.0;
            }
            *o = d;
        }
    }

    /// Clamps railed states in place; true if anything was clamped.
    fn clamp(&self, x: &mut [f64]) -> bool {
        let mut hit = false;
        for (v, &m) in x.iter_mut().zip(self.sat_mask) {
            if m && v.abs() >= self.v_sat {
                *v = v.signum() * self.v_sat;
                hit = true;
            }
        }
        hit
    }
}

/// Step size chosen for a state matrix: `dt_factor / max|λ(J)|`.
pub fn stable_step(j: &Matrix, dt_factor: f64) -> Result<Option<f64>> {
    let rate = eigenvalues(j)?.max_modulus();
    Ok((rate > 0.0).then(|| dt_factor / rate))
}

pub fn integrate(
    sys: &CircuitSystem,
    t_end: f64,
    x0: &[f64],
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    integrate_linear(LinearDynamics::from(sys), t_end, x0, opts)
}

/// Fixed-step classical RK4 with rail clamping after every stage and step.
pub fn integrate_linear(
    dynamics: LinearDynamics<'_>,
    t_end: f64,
    x0: &[f64],
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let n = dynamics.dim();
    if !(t_end > 0.0) {
        return Err(AmcError::InvalidParameter(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    if x0.len() != n {
        return Err(AmcError::DimensionMismatch(format!(
            "initial state has {} entries, system has {n}",
            x0.len()
        )));
    }
    let dt_max = match opts.dt {
        Some(dt) => dt,
        None => stable_step(dynamics.j, opts.dt_factor)?.unwrap_or(t_end / 1000.0),
    };
    let steps_f = (t_end / dt_max).ceil();
    if !steps_f.is_finite() || steps_f > opts.max_steps as f64 {
        return Err(AmcError::StepUnderflow {
            steps: if steps_f.is_finite() {
                steps_f as u64
            } else {
                u64::MAX
            },
            max_steps: opts.max_steps,
        });
    }
    let steps = (steps_f as usize).max(1);
    let dt = t_end / steps as f64;
    let stride = opts.record_stride.max(1);

    let cap = steps / stride + 2;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    let mut clamped = Vec::with_capacity(cap);

    let mut x = x0.to_vec();
    let mut hit = dynamics.clamp(&mut x);
    times.push(0.0);
    states.push(x.clone());
    clamped.push(hit);

    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for step in 1..=steps {
        dynamics.rhs(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        hit |= dynamics.clamp(&mut tmp);
        dynamics.rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        hit |= dynamics.clamp(&mut tmp);
        dynamics.rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        hit |= dynamics.clamp(&mut tmp);
        dynamics.rhs(&tmp, &mut k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        hit |= dynamics.clamp(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(AmcError::NonFinite { step });
        }
        if step % stride == 0 || step == steps {
            times.push(step as f64 * dt);
            states.push(x.clone());
            clamped.push(hit);
            hit = false;
        }
    }
    Ok(Trajectory {
        times,
        states,
        clamped,
    })
}

/// Full equilibrium state solving `J·x = −drive`.
pub fn steady_state_full(sys: &CircuitSystem) -> Result<Vec<f64>> {
    if sys.topology == Topology::Eigenvector {
        return Err(AmcError::NoLinearSteadyState);
    }
    let rhs: Vec<f64> = sys.drive.iter().map(|d| -d).collect();
    oracle::lu_solve(&sys.j, &rhs)
}

/// Equilibrium projected onto the output states.
pub fn steady_state(sys: &CircuitSystem) -> Result<Vec<f64>> {
    Ok(sys.output(&steady_state_full(sys)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettleReport {
    /// Earliest sample time after which the criterion holds for good;
    /// `None` when it never does.
    pub settle_time: Option<f64>,
    pub reference: Vec<f64>,
    pub criterion: f64,
}

impl SettleReport {
    pub fn settled(&self) -> bool {
        self.settle_time.is_some()
    }
}

fn rel_distance(state: &[f64], idx: &[usize], x_star: &[f64], ref_norm: f64) -> f64 {
    let d: f64 = idx
        .iter()
        .zip(x_star)
        .map(|(&i, r)| (state[i] - r).powi(2))
        .sum::<f64>()
        .sqrt();
    d / ref_norm
}

/// Settling time under `‖x(t) − x*‖₂ / ‖x*‖₂ ≤ tol`, required to hold at
/// every later sample.
pub fn settle_time(
    traj: &Trajectory,
    x_star: &[f64],
    tol: f64,
    output_indices: &[usize],
) -> Result<SettleReport> {
    if x_star.len() != output_indices.len() {
        return Err(AmcError::DimensionMismatch(format!(
            "reference has {} entries, {} output indices",
            x_star.len(),
            output_indices.len()
        )));
    }
    let ref_norm = norm2(x_star);
    if ref_norm == 0.0 {
        return Err(AmcError::ZeroReference);
    }
    let last_bad = traj
        .states
        .iter()
        .rposition(|s| rel_distance(s, output_indices, x_star, ref_norm) > tol);
    let settle = match last_bad {
        None => traj.times.first().copied(),
        Some(k) if k + 1 < traj.len() => Some(traj.times[k + 1]),
        Some(_) => None,
    };
    Ok(SettleReport {
        settle_time: settle,
        reference: x_star.to_vec(),
        criterion: tol,
    })
}

/// Seeded uniform start in `±amplitude`.
pub fn random_initial_state(dim: usize, seed: u64, amplitude: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| rng.random_range(-amplitude..=amplitude))
        .collect()
}

/// Angle (rad) between `x` and the line spanned by `v`, sign-agnostic.
pub fn angle_between(x: &[f64], v: &[f64]) -> f64 {
    let nx = norm2(x);
    let nv = norm2(v);
    if nx == 0.0 || nv == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let c: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (nx * nv);
    let perp: f64 = x
        .iter()
        .zip(v)
        .map(|(a, b)| (a / nx - c * b / nv).powi(2))
        .sum::<f64>()
        .sqrt();
    perp.atan2(c.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenMeasurement {
    pub angle_to_dominant: f64,
    pub rayleigh: f64,
    pub amplitude_ratio: f64,
    /// Eigenvalue targeted by the circuit, from the reference solver.
    pub lambda_reference: f64,
    pub eigvec_reference: Vec<f64>,
    pub output: Vec<f64>,
}

/// Reference eigenpair the eigenvector circuit should converge to: the
/// dominant pair for the positive loop, the most negative one without
/// inverters.
pub fn eigen_reference(sys: &CircuitSystem) -> Result<oracle::OracleResult> {
    let a = sys
        .meta
        .matrix
        .as_ref()
        .ok_or_else(|| AmcError::Precondition("circuit carries no matrix".into()))?;
    match sys.meta.sign {
        Some(EigenSign::Negative) => oracle::most_negative_eigenpair(a, 1e-11, 1_000_000, 7),
        _ => oracle::power_iteration(a, 1e-11, 1_000_000, 7),
    }
}

/// Windowed-variance settling test on the output direction: the summed
/// per-component variance of `x/‖x‖` over the trailing `window` seconds must
/// be below `threshold`.
pub fn direction_settled(
    traj: &Trajectory,
    output_indices: &[usize],
    window: f64,
    threshold: f64,
) -> bool {
    let t_last = match traj.times.last() {
        Some(&t) => t,
        None => return false,
    };
    let start = traj
        .times
        .iter()
        .position(|&t| t >= t_last - window)
        .unwrap_or(0)
        .min(traj.len().saturating_sub(2));
    let dirs: Vec<Vec<f64>> = traj.states[start..]
        .iter()
        .map(|s| {
            let o: Vec<f64> = output_indices.iter().map(|&i| s[i]).collect();
            let nrm = norm2(&o);
            o.into_iter()
                .map(|v| if nrm > 0.0 { v / nrm } else { 0.0 })
                .collect()
        })
        .collect();
    if dirs.len() < 2 || dirs.iter().any(|d| d.iter().all(|&v| v == 0.0)) {
        return false;
    }
    let k = dirs.len() as f64;
    let var: f64 = (0..output_indices.len())
        .map(|c| {
            let mean = dirs.iter().map(|d| d[c]).sum::<f64>() / k;
            dirs.iter().map(|d| (d[c] - mean).powi(2)).sum::<f64>() / k
        })
        .sum();
    var < threshold
}

/// Final-state diagnostics of an eigenvector run.
pub fn measure_eigen_result(traj: &Trajectory, sys: &CircuitSystem) -> Result<EigenMeasurement> {
    if sys.topology != Topology::Eigenvector {
        return Err(AmcError::Precondition("not an eigenvector circuit".into()));
    }
    let window = 10.0 / sys.oa().f_gbwp;
    if !direction_settled(traj, &sys.output_indices, window, 1e-6) {
        return Err(AmcError::NotSettled);
    }
    let a = sys
        .meta
        .matrix
        .as_ref()
        .expect("eigenvector circuit stores its matrix");
    let x = sys.output(traj.last_state());
    let reference = eigen_reference(sys)?;
    let v = reference.vector().to_vec();
    let ax = a.matvec(&x)?;
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let rayleigh = x.iter().zip(&ax).map(|(p, q)| p * q).sum::<f64>() / xx;
    let amp = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(EigenMeasurement {
        angle_to_dominant: angle_between(&x, &v),
        rayleigh,
        amplitude_ratio: amp / sys.v_sat,
        lambda_reference: reference.lambda().unwrap_or(f64::NAN),
        eigvec_reference: v,
        output: x,
    })
}

/// Simulation horizon for an eigenvector circuit: time for the fastest
/// growing mode to climb from the start amplitude to the rail, tripled to
/// leave room for post-saturation settling, plus a fixed margin.
pub fn eigen_horizon(sys: &CircuitSystem) -> Result<f64> {
    let growth = eigenvalues(&sys.j)?.max_real();
    if !(growth > 0.0) {
        return Err(AmcError::Precondition(
            "loop gain does not exceed 1; the state decays to zero".into(),
        ));
    }
    let climb = (sys.v_sat / EIGEN_START_AMPLITUDE * 10.0).ln() / growth;
    Ok(3.0 * climb + 200.0 / sys.oa().f_gbwp)
}

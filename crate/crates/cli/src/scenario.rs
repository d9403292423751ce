//! Scenario documents: parsing, validation and resolution into core types.

use std::path::{Path, PathBuf};

use amc_core::circuits::{EigenSign, OaParams, Topology};
use amc_core::device::DeviceConfig;
use amc_core::Matrix;
use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

/// A matrix given inline as rows, or as a path to a text file (relative
/// paths resolve against the scenario's directory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Inline(Vec<Vec<f64>>),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OaSpec {
    #[serde(default = "default_l0")]
    pub l0: f64,
    #[serde(default = "default_f_gbwp")]
    pub f_gbwp_hz: f64,
    #[serde(default = "default_v_sat")]
    pub v_sat_v: f64,
}

fn default_l0() -> f64 {
    1e5
}
fn default_f_gbwp() -> f64 {
    1e6
}
fn default_v_sat() -> f64 {
    1.0
}

impl Default for OaSpec {
    fn default() -> Self {
        Self {
            l0: default_l0(),
            f_gbwp_hz: default_f_gbwp(),
            v_sat_v: default_v_sat(),
        }
    }
}

impl OaSpec {
    pub fn params(&self) -> OaParams {
        OaParams {
            l0: self.l0,
            f_gbwp: self.f_gbwp_hz,
            v_sat: self.v_sat_v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceSpec {
    pub g0_siemens: f64,
    pub g_min_siemens: f64,
    pub g_max_siemens: f64,
    pub levels: u32,
    pub sigma_prog: f64,
    pub verify_window: f64,
    pub max_verify_iters: u32,
    /// Snap conductances to the level grid.
    pub quantize: bool,
    /// Run program-and-verify with `sigma_prog` write noise.
    pub program: bool,
}

impl Default for DeviceSpec {
    fn default() -> Self {
        let d = DeviceConfig::default();
        Self {
            g0_siemens: d.g0,
            g_min_siemens: d.g_min,
            g_max_siemens: d.g_max,
            levels: d.levels,
            sigma_prog: d.sigma_prog,
            verify_window: d.verify_window,
            max_verify_iters: d.max_verify_iters,
            quantize: false,
            program: false,
        }
    }
}

impl DeviceSpec {
    pub fn config(&self) -> DeviceConfig {
        DeviceConfig {
            g0: self.g0_siemens,
            g_min: self.g_min_siemens,
            g_max: self.g_max_siemens,
            levels: self.levels,
            sigma_prog: self.sigma_prog,
            verify_window: self.verify_window,
            max_verify_iters: self.max_verify_iters,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSpec {
    /// Simulated time; chosen from the pole report when absent.
    pub t_end_s: Option<f64>,
    /// Accepted relative error against the oracle.
    pub tol: f64,
    /// Relative band for the settling-time measurement.
    pub settle_tol: f64,
    pub seed: u64,
    /// Keep every n-th step in the trajectory; chosen automatically when absent.
    pub record_stride: Option<usize>,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            t_end_s: None,
            tol: 1e-3,
            settle_tol: amc_core::dynamics::SETTLE_TOL,
            seed: 0,
            record_stride: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub topology: Topology,
    pub matrix: MatrixSource,
    /// Vector operand: `x` for MVM, `y` for the solvers. Unused by the
    /// eigenvector circuit.
    #[serde(default)]
    pub input: Vec<f64>,
    /// TIA feedback conductance (`c` in the pseudoinverse circuits).
    #[serde(default)]
    pub tia_g_f_siemens: Option<f64>,
    /// Eigenvector circuit: relative offset of the mapped eigenvalue below
    /// the reference one.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Eigenvector circuit: mapped eigenvalue, overriding `delta`.
    #[serde(default)]
    pub lambda_mapped: Option<f64>,
    #[serde(default = "default_sign")]
    pub sign: EigenSign,
    #[serde(default)]
    pub oa: OaSpec,
    /// Inverters and second-stage amplifiers; defaults to `oa`.
    #[serde(default)]
    pub second_oa: Option<OaSpec>,
    #[serde(default)]
    pub device: DeviceSpec,
    #[serde(default)]
    pub sim: SimSpec,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_sign() -> EigenSign {
    EigenSign::Positive
}

/// Scenario with its matrix loaded and every field checked.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub matrix: Matrix,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Resolved> {
        let r = Self::parse(path)?;
        r.validate()?;
        Ok(r)
    }

    /// Reads the scenario and its matrix without validating them.
    pub fn parse(path: &Path) -> Result<Resolved> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let scenario: Scenario = serde_json::from_str(&text)
            .with_context(|| format!("parsing scenario {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        scenario.resolve(base)
    }

    pub fn resolve(self, base: &Path) -> Result<Resolved> {
        let matrix = match &self.matrix {
            MatrixSource::Inline(rows) => {
                Matrix::from_rows(rows).map_err(|e| anyhow!("matrix: {e}"))?
            }
            MatrixSource::File(p) => {
                let full = if p.is_absolute() {
                    p.clone()
                } else {
                    base.join(p)
                };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| anyhow!("matrix: cannot read {}: {e}", full.display()))?;
                let parsed = if full.extension().is_some_and(|e| e == "json") {
                    serde_json::from_str::<Vec<Vec<f64>>>(&text)
                        .map_err(|e| anyhow!("{e}"))
                        .and_then(|rows| Matrix::from_rows(&rows).map_err(|e| anyhow!("{e}")))
                } else {
                    Matrix::parse_text(&text).map_err(|e| anyhow!("{e}"))
                };
                parsed.map_err(|e| anyhow!("matrix: {}: {e}", full.display()))?
            }
        };
        Ok(Resolved {
            scenario: self,
            matrix,
        })
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("{path}: must be positive and finite, got {v}");
    }
    Ok(())
}

fn check_oa(path: &str, oa: &OaSpec) -> Result<()> {
    if !(oa.l0 > 1.0 && oa.l0.is_finite()) {
        bail!("{path}.l0: must exceed 1, got {}", oa.l0);
    }
    positive(&format!("{path}.f_gbwp_hz"), oa.f_gbwp_hz)?;
    positive(&format!("{path}.v_sat_v"), oa.v_sat_v)
}

impl Resolved {
    pub fn topology(&self) -> Topology {
        self.scenario.topology
    }

    pub fn oa(&self) -> OaParams {
        self.scenario.oa.params()
    }

    pub fn second_oa(&self) -> OaParams {
        self.scenario.second_oa.unwrap_or(self.scenario.oa).params()
    }

    /// Shape checks and parameter ranges; device-window fit is checked when
    /// the matrix is mapped.
    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        let (n, m) = self.matrix.shape();
        check_oa("oa", &s.oa)?;
        if let Some(o) = &s.second_oa {
            check_oa("second_oa", o)?;
        }
        s.device
            .config()
            .validate()
            .map_err(|e| anyhow!("device: {e}"))?;
        if let Some(g) = s.tia_g_f_siemens {
            positive("tia_g_f_siemens", g)?;
        }
        if let Some(t) = s.sim.t_end_s {
            positive("sim.t_end_s", t)?;
        }
        positive("sim.tol", s.sim.tol)?;
        positive("sim.settle_tol", s.sim.settle_tol)?;
        if s.sim.record_stride == Some(0) {
            bail!("sim.record_stride: must be at least 1");
        }
        if s.input.iter().any(|v| !v.is_finite()) {
            bail!("input: entries must be finite");
        }
        if self.matrix.entries().iter().any(|v| !v.is_finite()) {
            bail!("matrix: entries must be finite");
        }

        let expect_input = |len: usize, what: &str| -> Result<()> {
            if s.input.len() != len {
                bail!("input: {what} needs {len} entries, got {}", s.input.len());
            }
            Ok(())
        };
        match s.topology {
            Topology::Mvm | Topology::MvmSplitCol | Topology::MvmSplitRow => {
                expect_input(m, &format!("a {n}x{m} matrix-vector product"))?;
            }
            Topology::Inversion | Topology::InversionSplit => {
                if n != m {
                    bail!("matrix: inversion needs a square matrix, got {n}x{m}");
                }
                expect_input(n, "the right-hand side")?;
            }
            Topology::PinvLeft => {
                if n < m {
                    bail!("matrix: left inverse needs rows >= cols, got {n}x{m}");
                }
                expect_input(n, "the right-hand side")?;
            }
            Topology::PinvRight => {
                if n > m {
                    bail!("matrix: right inverse needs rows <= cols, got {n}x{m}");
                }
                expect_input(n, "the right-hand side")?;
            }
            Topology::Eigenvector => {
                if n != m {
                    bail!("matrix: eigenvector circuit needs a square matrix, got {n}x{m}");
                }
                if !s.input.is_empty() {
                    bail!("input: the eigenvector circuit is self-sustained and takes no input");
                }
                match (s.delta, s.lambda_mapped) {
                    (None, None) => {
                        bail!("delta: eigenvector scenarios need `delta` or `lambda_mapped`")
                    }
                    (_, Some(l)) => positive("lambda_mapped", l)?,
                    (Some(d), None) => {
                        if !(d > 0.0 && d < 1.0) {
                            bail!("delta: must lie in (0, 1), got {d}");
                        }
                    }
                }
            }
        }
        if !s.topology.uses_split() && !self.matrix.is_nonnegative() {
            let (r, c) = first_negative(&self.matrix);
            bail!(
                "matrix: negative entry at ({r}, {c}) cannot be mapped onto a single array; \
                 use a split topology"
            );
        }
        Ok(())
    }
}

pub fn first_negative(a: &Matrix) -> (usize, usize) {
    let idx = a.entries().iter().position(|&v| v < 0.0).unwrap_or(0);
    (idx / a.cols(), idx % a.cols())
}

/// Scenario fields a sweep may vary.
pub const SWEEP_AXES: &[&str] = &[
    "delta",
    "lambda_mapped",
    "l0",
    "f_gbwp_hz",
    "v_sat_v",
    "tia_g_f_siemens",
    "g0_siemens",
    "g_max_siemens",
    "levels",
    "bits",
    "sigma_prog",
    "verify_window",
    "scale",
    "max_row_sum",
    "t_end_s",
    "tol",
    "seed",
];

impl Resolved {
    /// Copy with one numeric field replaced.
    pub fn with_axis(&self, axis: &str, value: f64) -> Result<Resolved> {
        let mut r = self.clone();
        let s = &mut r.scenario;
        let whole = |v: f64| -> Result<u64> {
            if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                bail!("{axis}: value {v} must be a non-negative integer");
            }
            Ok(v as u64)
        };
        match axis {
            "delta" => {
                s.delta = Some(value);
                s.lambda_mapped = None;
            }
            "lambda_mapped" => s.lambda_mapped = Some(value),
            "l0" => s.oa.l0 = value,
            "f_gbwp_hz" => s.oa.f_gbwp_hz = value,
            "v_sat_v" => s.oa.v_sat_v = value,
            "tia_g_f_siemens" => s.tia_g_f_siemens = Some(value),
            "g0_siemens" => s.device.g0_siemens = value,
            "g_max_siemens" => s.device.g_max_siemens = value,
            "levels" => {
                s.device.levels = whole(value)? as u32;
                s.device.quantize = true;
            }
            "bits" => {
                let b = whole(value)?;
                if !(1..=31).contains(&b) {
                    bail!("bits: value {value} must lie in 1..=31");
                }
                s.device.levels = 1u32 << b;
                s.device.quantize = true;
            }
            "sigma_prog" => {
                s.device.sigma_prog = value;
                s.device.program = true;
            }
            "verify_window" => {
                s.device.verify_window = value;
                s.device.program = true;
            }
            "scale" => r.matrix = r.matrix.scale(value),
            "max_row_sum" => {
                let current = r
                    .matrix
                    .map(f64::abs)
                    .row_sums()
                    .into_iter()
                    .fold(0.0, f64::max);
                if current == 0.0 {
                    bail!("max_row_sum: matrix is zero and cannot be rescaled");
                }
                r.matrix = r.matrix.scale(value / current);
            }
            "t_end_s" => s.sim.t_end_s = Some(value),
            "tol" => s.sim.tol = value,
            "seed" => s.sim.seed = whole(value)?,
            other => bail!(
                "unknown sweep axis `{other}`; expected one of {}",
                SWEEP_AXES.join(", ")
            ),
        }
        if matches!(axis, "scale" | "max_row_sum") {
            r.scenario.matrix = MatrixSource::Inline(r.matrix.to_rows());
        }
        r.validate()?;
        Ok(r)
    }
}

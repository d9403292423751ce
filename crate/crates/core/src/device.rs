//! Resistive-device mapping: matrix entries become conductances in units of
//! a unit conductance `g0`, optionally snapped to a finite number of levels
//! and programmed with a noisy program-and-verify loop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{AmcError, Result};
use crate::matrix::{Matrix, SplitPair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    /// Unit conductance (S).
    pub g0: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub levels: u32,
    /// Relative standard deviation of one programming pulse.
    pub sigma_prog: f64,
    /// Relative acceptance window of the verify step.
    pub verify_window: f64,
    pub max_verify_iters: u32,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            g0: 100e-6,
            g_min: 0.0,
            g_max: 6.3e-3,
            levels: 64,
            sigma_prog: 0.0,
            verify_window: 0.01,
            max_verify_iters: 100,
        }
    }
}

impl DeviceConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AmcError::InvalidParameter(m.to_string()));
        if !(self.g0 > 0.0) {
            return bad("g0 must be positive");
        }
        if !(0.0 <= self.g_min && self.g_min < self.g_max) {
            return bad("device window must satisfy 0 <= g_min < g_max");
        }
        if self.levels < 2 {
            return bad("levels must be at least 2");
        }
        if !(self.sigma_prog >= 0.0) {
            return bad("sigma_prog must be nonnegative");
        }
        if !(self.verify_window > 0.0) {
            return bad("verify_window must be positive");
        }
        Ok(())
    }

    /// Spacing between adjacent programmable levels.
    pub fn level_step(&self) -> f64 {
        (self.g_max - self.g_min) / (self.levels - 1) as f64
    }

    /// Worst-case absolute quantization error, half a level step.
    pub fn quantization_bound(&self) -> f64 {
        0.5 * self.level_step()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Ideal,
    Quantized,
    Programmed,
}

/// Device conductances (siemens). Entries are 0 (unmapped) or inside the
/// device window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ConductanceJson", try_from = "ConductanceJson")]
pub struct ConductanceMatrix {
    pub g: Matrix,
    pub config: DeviceConfig,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct ConductanceJson {
    g0: f64,
    g_min: f64,
    g_max: f64,
    levels: u32,
    sigma_prog: f64,
    verify_window: f64,
    #[serde(default = "default_verify_iters")]
    max_verify_iters: u32,
    provenance: Provenance,
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

fn default_verify_iters() -> u32 {
    DeviceConfig::default().max_verify_iters
}

impl From<ConductanceMatrix> for ConductanceJson {
    fn from(c: ConductanceMatrix) -> Self {
        let cfg = c.config;
        Self {
            g0: cfg.g0,
            g_min: cfg.g_min,
            g_max: cfg.g_max,
            levels: cfg.levels,
            sigma_prog: cfg.sigma_prog,
            verify_window: cfg.verify_window,
            max_verify_iters: cfg.max_verify_iters,
            provenance: c.provenance,
            rows: c.g.rows(),
            cols: c.g.cols(),
            entries: c.g.entries().to_vec(),
        }
    }
}

impl TryFrom<ConductanceJson> for ConductanceMatrix {
    type Error = AmcError;

    fn try_from(j: ConductanceJson) -> Result<Self> {
        let config = DeviceConfig {
            g0: j.g0,
            g_min: j.g_min,
            g_max: j.g_max,
            levels: j.levels,
            sigma_prog: j.sigma_prog,
            verify_window: j.verify_window,
            max_verify_iters: j.max_verify_iters,
        };
        config.validate()?;
        let g = Matrix::new(j.rows, j.cols, j.entries)?;
        if let Some(&bad) = g
            .entries()
            .iter()
            .find(|&&v| v != 0.0 && !(v >= config.g_min && v <= config.g_max))
        {
            return Err(AmcError::InvalidParameter(format!(
                "conductance {bad:e} outside device window"
            )));
        }
        Ok(Self {
            g,
            config,
            provenance: j.provenance,
        })
    }
}

impl ConductanceMatrix {
    pub fn rows(&self) -> usize {
        self.g.rows()
    }

    pub fn cols(&self) -> usize {
        self.g.cols()
    }

    pub fn g0(&self) -> f64 {
        self.config.g0
    }
}

/// Maps a nonnegative matrix onto conductances `a · g0`.
pub fn map_matrix(a: &Matrix, cfg: &DeviceConfig) -> Result<ConductanceMatrix> {
    cfg.validate()?;
    let max = a.max_abs();
    let max_scale = if max > 0.0 {
        cfg.g_max / (max * cfg.g0)
    } else {
        f64::INFINITY
    };
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let v = a[(i, j)];
            if v < 0.0 {
                return Err(AmcError::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
            let g = v * cfg.g0;
            if g > cfg.g_max || (g > 0.0 && g < cfg.g_min) {
                return Err(AmcError::WindowOverflow {
                    row: i,
                    col: j,
                    value: v,
                    conductance: g,
                    g_min: cfg.g_min,
                    g_max: cfg.g_max,
                    max_scale,
                });
            }
        }
    }
    Ok(ConductanceMatrix {
        g: a.scale(cfg.g0),
        config: *cfg,
        provenance: Provenance::Ideal,
    })
}

/// Snaps every nonzero conductance to the nearest of `levels` uniformly
/// spaced states on `[g_min, g_max]`.
pub fn quantize(gm: &ConductanceMatrix) -> Result<ConductanceMatrix> {
    if gm.provenance != Provenance::Ideal {
        return Err(AmcError::Precondition(format!(
            "quantize expects ideal conductances, got {:?}",
            gm.provenance
        )));
    }
    let cfg = gm.config;
    let step = cfg.level_step();
    let top = (cfg.levels - 1) as f64;
    let g = gm.g.map(|v| {
        if v == 0.0 {
            return 0.0;
        }
        let k = ((v - cfg.g_min) / step).round().clamp(0.0, top);
        (cfg.g_min + k * step).min(cfg.g_max)
    });
    Ok(ConductanceMatrix {
        g,
        config: cfg,
        provenance: Provenance::Quantized,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProgramStats {
    /// Programming pulses summed over all nonzero cells.
    pub total_iterations: u64,
    pub programmed_cells: u64,
    /// Cells that never verified within `max_verify_iters` and were clamped
    /// to the window edge.
    pub clamp_events: u64,
}

impl ProgramStats {
    pub fn mean_iterations(&self) -> f64 {
        if self.programmed_cells == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.programmed_cells as f64
        }
    }
}

/// Program-and-verify: each cell is re-drawn as `target · (1 + N(0, σ))`
/// until it lands within `verify_window · target`. Cells that exhaust
/// `max_verify_iters` are clamped to the nearer window edge and counted.
pub fn program_with_verify(
    gm: &ConductanceMatrix,
    seed: u64,
) -> Result<(ConductanceMatrix, ProgramStats)> {
    if gm.provenance == Provenance::Programmed {
        return Err(AmcError::Precondition(
            "matrix is already programmed".to_string(),
        ));
    }
    let cfg = gm.config;
    let mut stats = ProgramStats::default();
    if cfg.sigma_prog == 0.0 {
        stats.programmed_cells = gm.g.entries().iter().filter(|&&v| v != 0.0).count() as u64;
        stats.total_iterations = stats.programmed_cells;
        return Ok((
            ConductanceMatrix {
                g: gm.g.clone(),
                config: cfg,
                provenance: Provenance::Programmed,
            },
            stats,
        ));
    }

    let noise =
        Normal::new(0.0, cfg.sigma_prog).map_err(|e| AmcError::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = cfg.verify_window;
    let g = gm.g.map(|target| {
        if target == 0.0 {
            return 0.0;
        }
        stats.programmed_cells += 1;
        let mut actual = target;
        let mut verified = false;
        for _ in 0..cfg.max_verify_iters.max(1) {
            stats.total_iterations += 1;
            actual = target * (1.0 + noise.sample(&mut rng));
            if (actual - target).abs() <= eps * target {
                verified = true;
                break;
            }
        }
        if !verified {
            stats.clamp_events += 1;
            actual = actual.clamp(target * (1.0 - eps), target * (1.0 + eps));
        }
        actual.clamp(cfg.g_min, cfg.g_max)
    });
    Ok((
        ConductanceMatrix {
            g,
            config: cfg,
            provenance: Provenance::Programmed,
        },
        stats,
    ))
}

/// Both halves of a split matrix mapped onto two arrays with the same
/// device configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedSplit {
    pub plus: ConductanceMatrix,
    pub minus: ConductanceMatrix,
}

impl MappedSplit {
    pub fn map(split: &SplitPair, cfg: &DeviceConfig) -> Result<Self> {
        Ok(Self {
            plus: map_matrix(&split.plus, cfg)?,
            minus: map_matrix(&split.minus, cfg)?,
        })
    }

    pub fn g0(&self) -> f64 {
        self.plus.config.g0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.plus.g.shape()
    }
}

/// Inverse of [`map_matrix`]: `g / g0`.
pub fn read_matrix(gm: &ConductanceMatrix) -> Matrix {
    let g0 = gm.config.g0;
    gm.g.map(|v| v / g0)
}

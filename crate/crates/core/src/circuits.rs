//! State-space models of the crosspoint-array circuits.
//!
//! Every amplifier is a single-pole macromodel `L(s) = L0 / (1 + s/ω0)` with
//! `ω0 = f_gbwp / L0`. An amplifier whose inverting node sits at voltage
//! `v⁻` and whose output is `v` therefore obeys
//!
//! ```text
//! dv/dt = ω0 · (−L0 · v⁻ − v)
//! ```
//!
//! and `v⁻` is the conductance-weighted average of everything connected to
//! the node (Kirchhoff's current law with no current into the amplifier).
//! Each builder turns one topology into `d(state)/dt = J · state + drive`,
//! keeping `L0` finite so gain error shows up in the steady state.
//!
//! `f_gbwp` is used directly as the rate in the pole law
//! `s = −f_gbwp · λ(U⁻¹A)`; no factor of 2π is applied.

use serde::{Deserialize, Serialize};

use crate::device::{read_matrix, ConductanceMatrix, MappedSplit};
use crate::error::{AmcError, Result};
use crate::matrix::{build_u, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OaParams {
    /// DC open-loop gain.
    pub l0: f64,
    /// Gain-bandwidth product.
    pub f_gbwp: f64,
    /// Output saturation level (V).
    pub v_sat: f64,
}

impl Default for OaParams {
    fn default() -> Self {
        Self {
            l0: 1e5,
            f_gbwp: 1e6,
            v_sat: 1.0,
        }
    }
}

impl OaParams {
    pub fn new(l0: f64, f_gbwp: f64, v_sat: f64) -> Result<Self> {
        let oa = Self { l0, f_gbwp, v_sat };
        oa.validate()?;
        Ok(oa)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l0 > 1.0) || !(self.f_gbwp > 0.0) || !(self.v_sat > 0.0) {
            return Err(AmcError::InvalidParameter(format!(
                "amplifier needs l0 > 1, f_gbwp > 0, v_sat > 0 (got {self:?})"
            )));
        }
        Ok(())
    }

    /// Open-loop 3-dB bandwidth ω0 = f_gbwp / L0.
    pub fn omega0(&self) -> f64 {
        self.f_gbwp / self.l0
    }

    /// Closed-loop rate of a unity-gain inverter built from this amplifier
    /// with equal resistors (feedback factor 1/2).
    pub fn inverter_rate(&self) -> f64 {
        self.f_gbwp / 2.0
    }
}

/// Transimpedance feedback. For the pseudoinverse circuits this is the
/// feedback conductance `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiaConfig {
    /// Feedback conductance (S).
    pub g_f: f64,
}

impl TiaConfig {
    pub fn new(g_f: f64) -> Result<Self> {
        if !(g_f > 0.0) {
            return Err(AmcError::InvalidParameter(format!(
                "feedback conductance must be positive, got {g_f}"
            )));
        }
        Ok(Self { g_f })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Mvm,
    MvmSplitCol,
    MvmSplitRow,
    Inversion,
    InversionSplit,
    PinvLeft,
    PinvRight,
    Eigenvector,
}

impl Topology {
    pub const ALL: [Topology; 8] = [
        Topology::Mvm,
        Topology::MvmSplitCol,
        Topology::MvmSplitRow,
        Topology::Inversion,
        Topology::InversionSplit,
        Topology::PinvLeft,
        Topology::PinvRight,
        Topology::Eigenvector,
    ];

    pub fn is_inversion(self) -> bool {
        matches!(self, Topology::Inversion | Topology::InversionSplit)
    }

    pub fn is_mvm(self) -> bool {
        matches!(
            self,
            Topology::Mvm | Topology::MvmSplitCol | Topology::MvmSplitRow
        )
    }

    pub fn uses_split(self) -> bool {
        matches!(
            self,
            Topology::MvmSplitCol | Topology::MvmSplitRow | Topology::InversionSplit
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSign {
    Positive,
    Negative,
}

/// Builder inputs kept alongside the state matrix for analysis and export.
/// Matrices are stored normalized (conductance / g0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CircuitMeta {
    pub g0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plus: Option<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minus: Option<Matrix>,
    pub input: Vec<f64>,
    pub oa: Option<OaParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_oa: Option<OaParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_mapped: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<EigenSign>,
}

/// Linear dynamics `d(state)/dt = j · state + drive`, with states flagged in
/// `sat_mask` held inside `±v_sat`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSystem {
    pub topology: Topology,
    pub state_dim: usize,
    /// State matrix (1/s).
    pub j: Matrix,
    /// Constant input term (V/s).
    pub drive: Vec<f64>,
    pub sat_mask: Vec<bool>,
    pub v_sat: f64,
    pub output_indices: Vec<usize>,
    pub meta: CircuitMeta,
}

impl CircuitSystem {
    fn new(
        topology: Topology,
        j: Matrix,
        drive: Vec<f64>,
        sat_mask: Vec<bool>,
        v_sat: f64,
        output_indices: Vec<usize>,
        meta: CircuitMeta,
    ) -> Self {
        let state_dim = j.rows();
        debug_assert_eq!(j.cols(), state_dim);
        debug_assert_eq!(drive.len(), state_dim);
        debug_assert_eq!(sat_mask.len(), state_dim);
        debug_assert!(output_indices.iter().all(|&i| i < state_dim));
        Self {
            topology,
            state_dim,
            j,
            drive,
            sat_mask,
            v_sat,
            output_indices,
            meta,
        }
    }

    /// Unclamped right-hand side `j · state + drive`.
    pub fn linear_rhs(&self, state: &[f64], out: &mut [f64]) {
        let n = self.state_dim;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = self
                .j
                .row(i)
                .iter()
                .zip(state)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + self.drive[i];
        }
    }

    /// Projects a full state onto the result vector.
    pub fn output(&self, state: &[f64]) -> Vec<f64> {
        self.output_indices.iter().map(|&i| state[i]).collect()
    }

    pub fn has_drive(&self) -> bool {
        self.drive.iter().any(|&d| d != 0.0)
    }

    /// Amplifier setting the speed scale of the circuit.
    pub fn oa(&self) -> OaParams {
        self.meta.oa.unwrap_or_default()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit system serializes")
    }
}

/// Rate coefficients of a transimpedance stage with feedback `g_f` whose
/// inverting node also sees a total array conductance `g_node`:
/// returns `(self_coeff, input_coeff)` so that
/// `dv/dt = self_coeff · v + input_coeff · I_in` where `I_in` is the array
/// current pushed into the node.
fn tia_coefficients(oa: &OaParams, g_f: f64, g_node: f64) -> (f64, f64) {
    let w0 = oa.omega0();
    let den = g_f + g_node;
    (-w0 * (oa.l0 * g_f / den + 1.0), -w0 * oa.l0 / den)
}

fn require_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(AmcError::DimensionMismatch(format!(
            "{what} has {got} entries, expected {want}"
        )));
    }
    Ok(())
}

fn require_nonnegative(g: &Matrix) -> Result<()> {
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            if g[(i, j)] < 0.0 {
                return Err(AmcError::NegativeEntry {
                    row: i,
                    col: j,
                    value: g[(i, j)],
                });
            }
        }
    }
    Ok(())
}

/// Single-array MVM (one TIA per row). `x_in` are the applied column
/// voltages; the TIA inverts, so applying `−x` yields `+(g0/g_f)·A·x`.
pub fn build_mvm(
    gm: &ConductanceMatrix,
    x_in: &[f64],
    tia: TiaConfig,
    oa: OaParams,
) -> Result<CircuitSystem> {
    oa.validate()?;
    require_nonnegative(&gm.g)?;
    let (n, m) = gm.g.shape();
    require_len("input vector", x_in.len(), m)?;
    let currents = gm.g.matvec(x_in)?;
    let g_node = gm.g.row_sums();

    let mut j = Matrix::zeros(n, n);
    let mut drive = vec![0.0; n];
    for i in 0..n {
        let (a, b) = tia_coefficients(&oa, tia.g_f, g_node[i]);
        j[(i, i)] = a;
        drive[i] = b * currents[i];
    }
    Ok(CircuitSystem::new(
        Topology::Mvm,
        j,
        drive,
        vec![false; n],
        oa.v_sat,
        (0..n).collect(),
        CircuitMeta {
            g0: gm.g0(),
            matrix: Some(read_matrix(gm)),
            input: x_in.to_vec(),
            oa: Some(oa),
            g_f: Some(tia.g_f),
            ..Default::default()
        },
    ))
}

fn check_split(split: &MappedSplit) -> Result<(usize, usize)> {
    if split.plus.g.shape() != split.minus.g.shape() {
        return Err(AmcError::DimensionMismatch(format!(
            "split halves differ: {:?} vs {:?}",
            split.plus.g.shape(),
            split.minus.g.shape()
        )));
    }
    require_nonnegative(&split.plus.g)?;
    require_nonnegative(&split.minus.g)?;
    Ok(split.shape())
}

/// Column-wise split MVM: A⁺ columns are driven by `−x`, A⁻ columns by `+x`,
/// so each row current is `−g0·(A·x)_i` and the TIA reads out
/// `+(g0/g_f)·A·x`.
pub fn build_mvm_split_col(
    split: &MappedSplit,
    x: &[f64],
    tia: TiaConfig,
    oa: OaParams,
) -> Result<CircuitSystem> {
    oa.validate()?;
    let (n, m) = check_split(split)?;
    require_len("input vector", x.len(), m)?;
    let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
    let i_plus = split.plus.g.matvec(&neg_x)?;
    let i_minus = split.minus.g.matvec(x)?;
    let g_plus = split.plus.g.row_sums();
    let g_minus = split.minus.g.row_sums();

    let mut j = Matrix::zeros(n, n);
    let mut drive = vec![0.0; n];
    for i in 0..n {
        let (a, b) = tia_coefficients(&oa, tia.g_f, g_plus[i] + g_minus[i]);
        j[(i, i)] = a;
        drive[i] = b * (i_plus[i] + i_minus[i]);
    }
    Ok(split_system(
        Topology::MvmSplitCol,
        split,
        x,
        j,
        drive,
        oa,
        Some(tia.g_f),
    ))
}

/// Row-wise split MVM: `x` biases the columns directly and each result is
/// the differential current of a row pair, `(I⁺_i − I⁻_i)/g_f`.
///
/// The three-amplifier readout is reduced to one differential first-order
/// stage built from `oa`, whose inverting node sees the combined conductance
/// of both rows.
pub fn build_mvm_split_row(
    split: &MappedSplit,
    x: &[f64],
    tia: TiaConfig,
    oa: OaParams,
) -> Result<CircuitSystem> {
    oa.validate()?;
    let (n, m) = check_split(split)?;
    require_len("input vector", x.len(), m)?;
    let i_plus = split.plus.g.matvec(x)?;
    let i_minus = split.minus.g.matvec(x)?;
    let g_plus = split.plus.g.row_sums();
    let g_minus = split.minus.g.row_sums();

    let mut j = Matrix::zeros(n, n);
    let mut drive = vec![0.0; n];
    for i in 0..n {
        let (a, b) = tia_coefficients(&oa, tia.g_f, g_plus[i] + g_minus[i]);
        j[(i, i)] = a;
        // the differential input presents −(I⁺ − I⁻) to the inverting stage
        drive[i] = -b * (i_plus[i] - i_minus[i]);
    }
    Ok(split_system(
        Topology::MvmSplitRow,
        split,
        x,
        j,
        drive,
        oa,
        Some(tia.g_f),
    ))
}

fn split_system(
    topology: Topology,
    split: &MappedSplit,
    input: &[f64],
    j: Matrix,
    drive: Vec<f64>,
    oa: OaParams,
    g_f: Option<f64>,
) -> CircuitSystem {
    let n = j.rows();
    CircuitSystem::new(
        topology,
        j,
        drive,
        vec![false; n],
        oa.v_sat,
        (0..n).collect(),
        CircuitMeta {
            g0: split.g0(),
            plus: Some(read_matrix(&split.plus)),
            minus: Some(read_matrix(&split.minus)),
            input: input.to_vec(),
            oa: Some(oa),
            g_f,
            ..Default::default()
        },
    )
}

fn diag_inverse(u: &Matrix) -> Vec<f64> {
    (0..u.rows()).map(|i| 1.0 / u[(i, i)]).collect()
}

/// Single-array inversion circuit (global feedback through the array):
///
/// ```text
/// dx/dt = ω0 · (L0 · U⁻¹ (y − A x) − x),   U = diag(1 + Σⱼ A_ij)
/// ```
///
/// The load conductance is `g0`, so the `1` in `U` is the normalized load.
/// Stability is not checked here; non-PD matrices build fine and simply
/// yield right-half-plane poles.
pub fn build_inversion(
    gm: &ConductanceMatrix,
    y_in: &[f64],
    oa: OaParams,
) -> Result<CircuitSystem> {
    oa.validate()?;
    gm.g.require_square()?;
    require_nonnegative(&gm.g)?;
    let n = gm.rows();
    require_len("input vector", y_in.len(), n)?;
    let a = read_matrix(gm);
    let uinv = diag_inverse(&build_u(&a)?);
    let w0 = oa.omega0();

    let mut j = Matrix::zeros(n, n);
    let mut drive = vec![0.0; n];
    for i in 0..n {
        for k in 0..n {
            j[(i, k)] = -w0 * oa.l0 * uinv[i] * a[(i, k)];
        }
        j[(i, i)] -= w0;
        drive[i] = w0 * oa.l0 * uinv[i] * y_in[i];
    }
    Ok(CircuitSystem::new(
        Topology::Inversion,
        j,
        drive,
        vec![false; n],
        oa.v_sat,
        (0..n).collect(),
        CircuitMeta {
            g0: gm.g0(),
            matrix: Some(a),
            input: y_in.to_vec(),
            oa: Some(oa),
            ..Default::default()
        },
    ))
}

/// Inversion of a signed matrix with two arrays and analog inverters.
///
/// States are `[x; w]` where `w` are the inverter outputs (ideally `−x`)
/// driving the A⁻ array:
///
/// ```text
/// dx/dt = ω0 · (L0 · U⁻¹ (y − A⁺ x − A⁻ w) − x),   U = diag(1 + Σⱼ (A⁺ + A⁻)_ij)
/// dw/dt = (f_inv / 2) · (−x − w)
/// ```
pub fn build_inversion_split(
    split: &MappedSplit,
    y_in: &[f64],
    oa: OaParams,
    inverter_oa: OaParams,
) -> Result<CircuitSystem> {
    oa.validate()?;
    inverter_oa.validate()?;
    let (n, m) = check_split(split)?;
    if n != m {
        return Err(AmcError::NotSquare { rows: n, cols: m });
    }
    require_len("input vector", y_in.len(), n)?;
    let ap = read_matrix(&split.plus);
    let am = read_matrix(&split.minus);
    let uinv = diag_inverse(&build_u(&ap.add(&am)?)?);
    let w0 = oa.omega0();
    let k_inv = inverter_oa.inverter_rate();

    let mut j = Matrix::zeros(2 * n, 2 * n);
    let mut drive = vec![0.0; 2 * n];
    for i in 0..n {
        for k in 0..n {
            j[(i, k)] = -w0 * oa.l0 * uinv[i] * ap[(i, k)];
            j[(i, n + k)] = -w0 * oa.l0 * uinv[i] * am[(i, k)];
        }
        j[(i, i)] -= w0;
        drive[i] = w0 * oa.l0 * uinv[i] * y_in[i];

        j[(n + i, i)] = -k_inv;
        j[(n + i, n + i)] = -k_inv;
    }
    Ok(CircuitSystem::new(
        Topology::InversionSplit,
        j,
        drive,
        vec![false; 2 * n],
        oa.v_sat,
        (0..n).collect(),
        CircuitMeta {
            g0: split.g0(),
            plus: Some(ap),
            minus: Some(am),
            input: y_in.to_vec(),
            oa: Some(oa),
            second_oa: Some(inverter_oa),
            ..Default::default()
        },
    ))
}

/// Left-inverse (least-squares) circuit for a tall `n×m` array.
///
/// States `[v; x]`: `n` TIA outputs with feedback `c` whose inverting node
/// collects `g0·(A x − y)`, so that `v → (g0/c)·(y − A x)`; and `m` second
/// stage amplifiers acting as integrators of the right-array column
/// currents `Aᵀ v`, normalized by each column's total conductance:
///
/// ```text
/// dx_k/dt = f_gbwp₂ · (Aᵀ v)_k / Σ_i A_ik
/// ```
///
/// Equilibrium forces `Aᵀ v = 0`, i.e. `Aᵀ (y − A x) = 0`. Square matrices
/// are accepted and give `x = A⁻¹ y` regardless of definiteness.
pub fn build_pinv_left(
    gm: &ConductanceMatrix,
    y_in: &[f64],
    tia: TiaConfig,
    oa1: OaParams,
    oa2: OaParams,
) -> Result<CircuitSystem> {
    oa1.validate()?;
    oa2.validate()?;
    require_nonnegative(&gm.g)?;
    let (n, m) = gm.g.shape();
    if n < m {
        return Err(AmcError::DimensionMismatch(format!(
            "left inverse needs a tall array (rows >= cols), got {n}x{m}"
        )));
    }
    require_len("input vector", y_in.len(), n)?;
    let a = read_matrix(gm);
    let g0 = gm.g0();
    let g_node = gm.g.row_sums();
    let col = nonzero_col_sums(&a)?;

    let mut j = Matrix::zeros(n + m, n + m);
    let mut drive = vec![0.0; n + m];
    for i in 0..n {
        let (self_c, in_c) = tia_coefficients(&oa1, tia.g_f, g_node[i]);
        j[(i, i)] = self_c;
        for k in 0..m {
            j[(i, n + k)] = in_c * g0 * a[(i, k)];
        }
        drive[i] = -in_c * g0 * y_in[i];
    }
    for k in 0..m {
        for i in 0..n {
            j[(n + k, i)] = oa2.f_gbwp * a[(i, k)] / col[k];
        }
    }
    Ok(CircuitSystem::new(
        Topology::PinvLeft,
        j,
        drive,
        vec![false; n + m],
        oa1.v_sat,
        (n..n + m).collect(),
        CircuitMeta {
            g0,
            matrix: Some(a),
            input: y_in.to_vec(),
            oa: Some(oa1),
            second_oa: Some(oa2),
            g_f: Some(tia.g_f),
            ..Default::default()
        },
    ))
}

/// Right-inverse (minimum-norm) circuit. The arrays store `Aᵀ` (`n×m`,
/// `n ≥ m`) for a broad `m×n` system `A x = y`.
///
/// States `[u; w]`: `n` TIA outputs with `u → (g0/c)·Aᵀ w`, and `m`
/// integrating amplifiers fed with the input currents:
///
/// ```text
/// dw_k/dt = f_gbwp₂ · (y_k − (A u)_k) / Σ_i Aᵀ_ik
/// ```
///
/// At equilibrium `A u = y` with `u` in the row space of `A`, so `u` is the
/// minimum-norm solution.
pub fn build_pinv_right(
    gm_t: &ConductanceMatrix,
    y_in: &[f64],
    tia: TiaConfig,
    oa1: OaParams,
    oa2: OaParams,
) -> Result<CircuitSystem> {
    oa1.validate()?;
    oa2.validate()?;
    require_nonnegative(&gm_t.g)?;
    let (n, m) = gm_t.g.shape();
    if n < m {
        return Err(AmcError::DimensionMismatch(format!(
            "right inverse array stores Aᵀ and must be tall (rows >= cols), got {n}x{m}"
        )));
    }
    require_len("input vector", y_in.len(), m)?;
    let at = read_matrix(gm_t);
    let g0 = gm_t.g0();
    let g_node = gm_t.g.row_sums();
    let col = nonzero_col_sums(&at)?;

    let mut j = Matrix::zeros(n + m, n + m);
    let mut drive = vec![0.0; n + m];
    for i in 0..n {
        let (self_c, in_c) = tia_coefficients(&oa1, tia.g_f, g_node[i]);
        j[(i, i)] = self_c;
        for k in 0..m {
            // w is applied inverted to the left array
            j[(i, n + k)] = -in_c * g0 * at[(i, k)];
        }
    }
    for k in 0..m {
        for i in 0..n {
            j[(n + k, i)] = -oa2.f_gbwp * at[(i, k)] / col[k];
        }
        drive[n + k] = oa2.f_gbwp * y_in[k] / col[k];
    }
    Ok(CircuitSystem::new(
        Topology::PinvRight,
        j,
        drive,
        vec![false; n + m],
        oa1.v_sat,
        (0..n).collect(),
        CircuitMeta {
            g0,
            matrix: Some(at),
            input: y_in.to_vec(),
            oa: Some(oa1),
            second_oa: Some(oa2),
            g_f: Some(tia.g_f),
            ..Default::default()
        },
    ))
}

fn nonzero_col_sums(a: &Matrix) -> Result<Vec<f64>> {
    let col = a.col_sums();
    if let Some(k) = col.iter().position(|&c| c <= 0.0) {
        return Err(AmcError::Precondition(format!(
            "column {k} of the array is empty; matrix is rank deficient"
        )));
    }
    Ok(col)
}

/// Self-sustained eigenvector circuit. The mapped eigenvalue `λ̂` sets the
/// TIA feedback conductance `λ̂·g0`.
///
/// `Positive`: states `[u; x]`, TIA outputs `u → −A x / λ̂` followed by
/// unity-gain inverters `x → −u`, with the inverter outputs clamped at
/// `±v_sat`. `Negative`: inverters removed, the TIA outputs feed the array
/// directly and are the clamped states; this loop selects the most negative
/// eigenvalue.
///
/// There is no drive; growth starts from a small nonzero initial state and
/// requires `λ̂` slightly below the targeted eigenvalue magnitude.
pub fn build_eigenvector(
    gm: &ConductanceMatrix,
    lambda_mapped: f64,
    sign: EigenSign,
    oa: OaParams,
    inverter_oa: OaParams,
) -> Result<CircuitSystem> {
    oa.validate()?;
    gm.g.require_square()?;
    require_nonnegative(&gm.g)?;
    if !(lambda_mapped > 0.0) {
        return Err(AmcError::InvalidParameter(format!(
            "mapped eigenvalue must be positive, got {lambda_mapped}"
        )));
    }
    let n = gm.rows();
    let a = read_matrix(gm);
    let rows = a.row_sums();
    let w0 = oa.omega0();
    let meta = CircuitMeta {
        g0: gm.g0(),
        matrix: Some(a.clone()),
        input: Vec::new(),
        oa: Some(oa),
        second_oa: (sign == EigenSign::Positive).then_some(inverter_oa),
        g_f: Some(lambda_mapped * gm.g0()),
        lambda_mapped: Some(lambda_mapped),
        sign: Some(sign),
        ..Default::default()
    };

    match sign {
        EigenSign::Positive => {
            inverter_oa.validate()?;
            let k_inv = inverter_oa.inverter_rate();
            let mut j = Matrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                let den = rows[i] + lambda_mapped;
                j[(i, i)] = -w0 * (oa.l0 * lambda_mapped / den + 1.0);
                for k in 0..n {
                    j[(i, n + k)] = -w0 * oa.l0 * a[(i, k)] / den;
                }
                j[(n + i, i)] = -k_inv;
                j[(n + i, n + i)] = -k_inv;
            }
            let mut sat_mask = vec![false; 2 * n];
            sat_mask[n..].iter_mut().for_each(|s| *s = true);
            Ok(CircuitSystem::new(
                Topology::Eigenvector,
                j,
                vec![0.0; 2 * n],
                sat_mask,
                inverter_oa.v_sat,
                (n..2 * n).collect(),
                meta,
            ))
        }
        EigenSign::Negative => {
            let mut j = Matrix::zeros(n, n);
            for i in 0..n {
                let den = rows[i] + lambda_mapped;
                for k in 0..n {
                    j[(i, k)] = -w0 * oa.l0 * a[(i, k)] / den;
                }
                j[(i, i)] -= w0 * (oa.l0 * lambda_mapped / den + 1.0);
            }
            Ok(CircuitSystem::new(
                Topology::Eigenvector,
                j,
                vec![0.0; n],
                vec![true; n],
                oa.v_sat,
                (0..n).collect(),
                meta,
            ))
        }
    }
}

//! Reference solvers for every operation the circuits compute.
//!
//! These share nothing with the circuit builders or the integrator; the
//! pseudoinverse routines deliberately use the normal equations so that the
//! reference mirrors the formula the circuits realize.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AmcError, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    DirectSolve,
    NormalEquations,
    MinNorm,
    PowerIteration,
    DenseMvm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OracleValue {
    Vector(Vec<f64>),
    Eigenpair { lambda: f64, vector: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: OracleValue,
    pub residual: f64,
    pub method: OracleMethod,
}

impl OracleResult {
    pub fn vector(&self) -> &[f64] {
        match &self.value {
            OracleValue::Vector(v) => v,
            OracleValue::Eigenpair { vector, .. } => vector,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.value {
            OracleValue::Eigenpair { lambda, .. } => Some(lambda),
            OracleValue::Vector(_) => None,
        }
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense product `a · x`.
pub fn mvm(a: &Matrix, x: &[f64]) -> Result<Vec<f64>> {
    a.matvec(x)
}

/// Gaussian elimination with partial pivoting on an owned copy. Returns the
/// solution of `a · x = y`.
pub fn lu_solve(a: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(AmcError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if y.len() != n {
        return Err(AmcError::DimensionMismatch(format!(
            "matrix is {n}x{n}, right-hand side has {} entries",
            y.len()
        )));
    }
    let threshold = 1e-12 * a.norm().max(f64::MIN_POSITIVE);
    let mut m = a.to_rows();
    let mut b = y.to_vec();
    for k in 0..n {
        let (piv, pval) = (k..n)
            .map(|i| (i, m[i][k].abs()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pval < threshold {
            return Err(AmcError::Singular {
                pivot: pval,
                threshold,
            });
        }
        m.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / m[i][i];
    }
    Ok(x)
}

/// x = A⁻¹y.
pub fn solve(a: &Matrix, y: &[f64]) -> Result<OracleResult> {
    let x = lu_solve(a, y)?;
    let residual = norm2(&sub(&a.matvec(&x)?, y));
    Ok(OracleResult {
        value: OracleValue::Vector(x),
        residual,
        method: OracleMethod::DirectSolve,
    })
}

/// Least-squares solution (AᵀA)⁻¹Aᵀy of a tall system. The reported residual
/// is the optimality condition ‖Aᵀ(y − Ax)‖₂.
pub fn pinv_left_solve(a: &Matrix, y: &[f64]) -> Result<OracleResult> {
    if a.rows() < a.cols() {
        return Err(AmcError::DimensionMismatch(format!(
            "left inverse needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if y.len() != a.rows() {
        return Err(AmcError::DimensionMismatch(format!(
            "matrix has {} rows, y has {} entries",
            a.rows(),
            y.len()
        )));
    }
    let at = a.transpose();
    let ata = at.matmul(a)?;
    let aty = at.matvec(y)?;
    let x = lu_solve(&ata, &aty)?;
    let r = sub(y, &a.matvec(&x)?);
    let residual = norm2(&at.matvec(&r)?);
    Ok(OracleResult {
        value: OracleValue::Vector(x),
        residual,
        method: OracleMethod::NormalEquations,
    })
}

/// Minimum-norm solution Aᵀ(AAᵀ)⁻¹y of a broad system; residual is ‖Ax − y‖₂.
pub fn pinv_right_solve(a: &Matrix, y: &[f64]) -> Result<OracleResult> {
    if a.rows() > a.cols() {
        return Err(AmcError::DimensionMismatch(format!(
            "right inverse needs rows <= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if y.len() != a.rows() {
        return Err(AmcError::DimensionMismatch(format!(
            "matrix has {} rows, y has {} entries",
            a.rows(),
            y.len()
        )));
    }
    let at = a.transpose();
    let aat = a.matmul(&at)?;
    let z = lu_solve(&aat, y)?;
    let x = at.matvec(&z)?;
    let residual = norm2(&sub(&a.matvec(&x)?, y));
    Ok(OracleResult {
        value: OracleValue::Vector(x),
        residual,
        method: OracleMethod::MinNorm,
    })
}

/// Power iteration for the eigenvalue of largest magnitude.
///
/// The eigenvalue is the Rayleigh quotient of the converged unit vector, so a
/// negative dominant eigenvalue keeps its sign. The returned vector has its
/// largest-magnitude entry positive.
pub fn power_iteration(a: &Matrix, tol: f64, max_iters: usize, seed: u64) -> Result<OracleResult> {
    if !a.is_square() {
        return Err(AmcError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    for _ in 0..max_iters {
        let w = a.matvec(&v)?;
        let lambda = dot(&v, &w);
        let residual = norm2(
            &w.iter()
                .zip(&v)
                .map(|(wi, vi)| wi - lambda * vi)
                .collect::<Vec<_>>(),
        );
        if residual <= tol {
            return Ok(OracleResult {
                value: OracleValue::Eigenpair {
                    lambda,
                    vector: canonical_sign(v),
                },
                residual,
                method: OracleMethod::PowerIteration,
            });
        }
        let nw = norm2(&w);
        if nw == 0.0 {
            return Err(AmcError::NoConvergence { iterations: 0 });
        }
        v = w.into_iter().map(|x| x / nw).collect();
    }
    Err(AmcError::NoConvergence {
        iterations: max_iters,
    })
}

/// Eigenpair of the most negative eigenvalue, via power iteration on the
/// shifted matrix σI − A with σ the largest absolute row sum (a Gershgorin
/// bound on the spectral radius).
pub fn most_negative_eigenpair(
    a: &Matrix,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<OracleResult> {
    if !a.is_square() {
        return Err(AmcError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let sigma = (0..n)
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let shifted = Matrix::identity(n).scale(sigma).sub(a)?;
    let r = power_iteration(&shifted, tol, max_iters, seed)?;
    let v = r.vector().to_vec();
    let lambda = dot(&v, &a.matvec(&v)?);
    let residual = norm2(
        &a.matvec(&v)?
            .iter()
            .zip(&v)
            .map(|(w, x)| w - lambda * x)
            .collect::<Vec<_>>(),
    );
    Ok(OracleResult {
        value: OracleValue::Eigenpair { lambda, vector: v },
        residual,
        method: OracleMethod::PowerIteration,
    })
}

fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let k = v
        .iter()
        .enumerate()
        .fold(
            (0, 0.0),
            |b, (i, x)| if x.abs() > b.1 { (i, x.abs()) } else { b },
        )
        .0;
    if v[k] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

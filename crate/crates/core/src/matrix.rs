//! Dense real matrices, negative-entry splitting and eigenvalues.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; [`Matrix`] is used for everything
//! two-dimensional. The eigenvalue routine reduces to upper Hessenberg form
//! with Householder reflections and then runs Francis double-shift QR
//! sweeps, so real input always yields exact conjugate pairs.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AmcError, Result};

/// Default cap on the dimension accepted by [`eigenvalues`].
pub const EIGEN_DIM_CAP: usize = 256;

/// Maximum number of QR sweeps before [`eigenvalues`] gives up.
pub const EIGEN_MAX_ITERS: usize = 10_000;

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = AmcError;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        Matrix::new(raw.rows, raw.cols, raw.entries)
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(AmcError::InvalidShape {
                rows,
                cols,
                reason: "matrix must have at least one row and one column".into(),
            });
        }
        if entries.len() != rows * cols {
            return Err(AmcError::InvalidShape {
                rows,
                cols,
                reason: format!("expected {} entries, got {}", rows * cols, entries.len()),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut entries = Vec::with_capacity(n * m);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != m {
                return Err(AmcError::InvalidShape {
                    rows: n,
                    cols: m,
                    reason: format!("row {i} has {} entries", r.len()),
                });
            }
            entries.extend_from_slice(r);
        }
        Self::new(n, m, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut out = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            out[(i, i)] = v;
        }
        out
    }

    /// A single-column matrix holding `v`.
    pub fn column(v: &[f64]) -> Self {
        Self::zeros(v.len(), 1).with_entries(v.to_vec())
    }

    fn with_entries(mut self, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), self.entries.len());
        self.entries = entries;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|v| v * k)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(AmcError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(AmcError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(AmcError::DimensionMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (acc, v) in s.iter_mut().zip(self.row(i)) {
                *acc += v;
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|&v| v >= 0.0)
    }

    /// (A + Aᵀ)/2.
    pub fn symmetric_part(&self) -> Result<Self> {
        self.require_square()?;
        let t = self.transpose();
        Ok(self.add(&t)?.scale(0.5))
    }

    pub(crate) fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(AmcError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Parses the whitespace-separated text format (one row per line).
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|e| AmcError::Parse {
                        line: lineno + 1,
                        msg: format!("{tok:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(AmcError::Parse {
                        line: lineno + 1,
                        msg: format!("expected {} entries, got {}", first.len(), row.len()),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(AmcError::Parse {
                line: 0,
                msg: "no matrix rows".into(),
            });
        }
        Self::from_rows(&rows)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

impl FromStr for Matrix {
    type Err = AmcError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_text(s)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Nonnegative decomposition `A = plus - minus`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPair {
    pub plus: Matrix,
    pub minus: Matrix,
}

impl SplitPair {
    pub fn reconstruct(&self) -> Matrix {
        self.plus
            .sub(&self.minus)
            .expect("split halves share a shape")
    }

    /// A⁺ + A⁻, i.e. |A| for the canonical split.
    pub fn total(&self) -> Matrix {
        self.plus
            .add(&self.minus)
            .expect("split halves share a shape")
    }
}

/// A± = (|A| ± A)/2: every entry lands wholly in one half.
pub fn split_canonical(a: &Matrix) -> SplitPair {
    SplitPair {
        plus: a.map(|v| if v > 0.0 { v } else { 0.0 }),
        minus: a.map(|v| if v < 0.0 { -v } else { 0.0 }),
    }
}

/// U = diag(1 + Σⱼ a_ij), the row normalization of the inversion circuit.
pub fn build_u(a: &Matrix) -> Result<Matrix> {
    a.require_square()?;
    Ok(Matrix::diag(
        &a.row_sums().iter().map(|s| 1.0 + s).collect::<Vec<_>>(),
    ))
}

/// PD test on the symmetric part via Cholesky.
pub fn is_positive_definite(a: &Matrix) -> Result<bool> {
    let s = a.symmetric_part()?;
    Ok(cholesky(&s).is_some())
}

/// Lower-triangular Cholesky factor, or `None` when a pivot is not positive.
pub fn cholesky(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Eigenvalues of a square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
    pub source_dim: usize,
}

impl Spectrum {
    pub fn min_real(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_real(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }
}

pub fn eigenvalues(a: &Matrix) -> Result<Spectrum> {
    eigenvalues_capped(a, EIGEN_DIM_CAP)
}

/// All eigenvalues, sorted by descending real part then descending imaginary
/// part.
pub fn eigenvalues_capped(a: &Matrix, cap: usize) -> Result<Spectrum> {
    a.require_square()?;
    let n = a.rows();
    if n > cap {
        return Err(AmcError::TooLarge { dim: n, cap });
    }
    let mut h = a.clone();
    hessenberg_reduce(&mut h);
    let mut values = hessenberg_qr(&mut h)?;
    values.sort_by(|x, y| {
        y.re.partial_cmp(&x.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(y.im.partial_cmp(&x.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(Spectrum {
        values,
        source_dim: n,
    })
}

pub fn min_real_eigenvalue(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?.min_real())
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg_reduce(h: &mut Matrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let f: f64 = (m..=high).rev().map(|i| ort[i] * h[(i, j)]).sum::<f64>() / hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let f: f64 = (m..=high).rev().map(|j| ort[j] * h[(i, j)]).sum::<f64>() / hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        h[(m, m - 1)] = scale * g;
        for i in m + 1..=high {
            h[(i, m - 1)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
#[allow(unused_assignments)]
fn hessenberg_qr(h: &mut Matrix) -> Result<Vec<Complex64>> {
    let nn = h.rows();
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    let low: isize = 0;
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut w, mut x, mut y);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    let mut total_iters = 0usize;
    let at = |i: isize, j: isize| (i as usize, j as usize);

    while n >= low {
        let mut l = n;
        while l > low {
            s = h[at(l - 1, l - 1)].abs() + h[at(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[at(l, l - 1)].abs() <= eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            h[at(n, n)] += exshift;
            d[n as usize] = h[at(n, n)];
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            w = h[at(n, n - 1)] * h[at(n - 1, n)];
            p = (h[at(n - 1, n - 1)] - h[at(n, n)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[at(n, n)] += exshift;
            h[at(n - 1, n - 1)] += exshift;
            x = h[at(n, n)];
            let (nu, nm) = (n as usize, (n - 1) as usize);
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[nm] = x + z;
                d[nu] = d[nm];
                if z != 0.0 {
                    d[nu] = x - w / z;
                }
                e[nm] = 0.0;
                e[nu] = 0.0;
            } else {
                d[nm] = x + p;
                d[nu] = x + p;
                e[nm] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[at(n, n)];
            y = 0.0;
            w = 0.0;
            if l < n {
                y = h[at(n - 1, n - 1)];
                w = h[at(n, n - 1)] * h[at(n - 1, n)];
            }

            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    h[at(i, i)] -= x;
                }
                s = h[at(n, n - 1)].abs() + h[at(n - 1, n - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        h[at(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            total_iters += 1;
            if total_iters > EIGEN_MAX_ITERS {
                return Err(AmcError::NoConvergence {
                    iterations: total_iters,
                });
            }

            // two consecutive small sub-diagonal elements
            let mut m = n - 2;
            while m >= l {
                z = h[at(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[at(m + 1, m)] + h[at(m, m + 1)];
                q = h[at(m + 1, m + 1)] - z - r - s;
                r = h[at(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[at(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (h[at(m - 1, m - 1)].abs() + z.abs() + h[at(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in m + 2..=n {
                h[at(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[at(i, i - 3)] = 0.0;
                }
            }

            // double QR step on rows l..n, columns m..n
            let mut k = m;
            while k < n {
                let notlast = k != n - 1;
                if k != m {
                    p = h[at(k, k - 1)];
                    q = h[at(k + 1, k - 1)];
                    r = if notlast { h[at(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[at(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[at(k, k - 1)] = -h[at(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn as isize {
                        p = h[at(k, j)] + q * h[at(k + 1, j)];
                        if notlast {
                            p += r * h[at(k + 2, j)];
                            h[at(k + 2, j)] -= p * z;
                        }
                        h[at(k, j)] -= p * x;
                        h[at(k + 1, j)] -= p * y;
                    }

                    let upper = n.min(k + 3);
                    for i in 0..=upper {
                        p = x * h[at(i, k)] + y * h[at(i, k + 1)];
                        if notlast {
                            p += z * h[at(i, k + 2)];
                            h[at(i, k + 2)] -= p * r;
                        }
                        h[at(i, k)] -= p;
                        h[at(i, k + 1)] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }

    Ok(d.into_iter()
        .zip(e)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

#![allow(dead_code)]

use amc_core::device::{map_matrix, ConductanceMatrix, DeviceConfig};
use amc_core::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const G0: f64 = 1e-4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Wide device window so test matrices never overflow.
pub fn wide_cfg() -> DeviceConfig {
    DeviceConfig {
        g0: G0,
        g_min: 0.0,
        g_max: 1.0,
        ..DeviceConfig::default()
    }
}

pub fn mapped(a: &Matrix) -> ConductanceMatrix {
    map_matrix(a, &wide_cfg()).unwrap()
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    Matrix::new(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect(),
    )
    .unwrap()
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Symmetric, strictly diagonally dominant, nonnegative: PD and mappable
/// onto a single array. `margin` is added on top of the off-diagonal row sum.
pub fn pd_nonnegative(rng: &mut ChaCha8Rng, n: usize, margin: (f64, f64)) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for k in i + 1..n {
            let v = rng.random_range(0.0..1.0);
            a[(i, k)] = v;
            a[(k, i)] = v;
        }
    }
    for i in 0..n {
        let off: f64 = a.row(i).iter().sum();
        a[(i, i)] = off + rng.random_range(margin.0..margin.1);
    }
    a
}

/// Symmetric diagonally dominant with signed off-diagonal entries.
pub fn pd_signed(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for k in i + 1..n {
            let v = rng.random_range(-1.0..1.0);
            a[(i, k)] = v;
            a[(k, i)] = v;
        }
    }
    for i in 0..n {
        let off: f64 = a.row(i).iter().map(|v| v.abs()).sum();
        a[(i, i)] = off + rng.random_range(0.5..2.0);
    }
    a
}

pub fn random_symmetric_nonnegative(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let v = rng.random_range(0.0..1.0);
            a[(i, k)] = v;
            a[(k, i)] = v;
        }
    }
    a
}

pub fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    let num: f64 = got
        .iter()
        .zip(want)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = want.iter().map(|b| b * b).sum::<f64>().sqrt();
    num / den
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Least-squares fit y = a + b x; returns (a, b, r²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let b = sxy / sxx;
    (my - b * mx, b, sxy * sxy / (sxx * syy))
}

pub struct Outcome {
    pub pass: bool,
    pub line: String,
}

impl Outcome {
    pub fn print_and_assert(&self) {
        println!("{}", self.line);
        assert!(self.pass, "{}", self.line);
    }
}

pub fn outcome(id: u32, name: &str, pass: bool, detail: &str) -> Outcome {
    Outcome {
        pass,
        line: format!(
            "[{}] criterion {id}: {name} -- {detail}",
            if pass { "PASS" } else { "FAIL" }
        ),
    }
}

pub mod strategies {
    use amc_core::matrix::Matrix;
    use proptest::prelude::*;

    pub fn matrix(
        rows: std::ops::RangeInclusive<usize>,
        cols: std::ops::RangeInclusive<usize>,
        lo: f64,
        hi: f64,
    ) -> impl Strategy<Value = Matrix> {
        (rows, cols).prop_flat_map(move |(r, c)| {
            proptest::collection::vec(lo..hi, r * c)
                .prop_map(move |v| Matrix::new(r, c, v).unwrap())
        })
    }

    pub fn square(
        n: std::ops::RangeInclusive<usize>,
        lo: f64,
        hi: f64,
    ) -> impl Strategy<Value = Matrix> {
        n.prop_flat_map(move |n| {
            proptest::collection::vec(lo..hi, n * n)
                .prop_map(move |v| Matrix::new(n, n, v).unwrap())
        })
    }
}

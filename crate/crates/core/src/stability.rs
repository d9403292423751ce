//! Pole analysis: circuit poles are the eigenvalues of the state matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuits::{CircuitSystem, Topology};
use crate::error::{AmcError, Result};
use crate::matrix::{build_u, eigenvalues, Matrix};

/// Natural log of 100: time constants needed to decay to 1%.
pub const LN_100: f64 = 4.605_170_185_988_092;

/// Origin tolerance relative to the gain-bandwidth product.
pub const ORIGIN_TOL_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    /// Some poles on the imaginary axis (within tolerance), none to the
    /// right: bounded but not asymptotically stable.
    Marginal,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Pole {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<Pole> for Complex64 {
    fn from(p: Pole) -> Self {
        Complex64::new(p.re, p.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub poles: Vec<Pole>,
    /// Slowest decaying mode: largest real part among poles off the
    /// imaginary axis.
    pub dominant: Option<Pole>,
    /// min Re λ(U⁻¹A) for inversion circuits.
    pub lambda_min: Option<f64>,
    pub verdict: Verdict,
    /// `ln(100) / |Re(dominant)|` when the dominant pole decays.
    pub bound_time: Option<f64>,
}

impl PoleReport {
    pub fn complex_poles(&self) -> Vec<Complex64> {
        self.poles.iter().map(|&p| p.into()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pole report serializes")
    }
}

pub fn verdict(poles: &[Complex64], origin_tol: f64) -> Verdict {
    if poles.iter().any(|z| z.re > origin_tol) {
        Verdict::Unstable
    } else if poles.iter().any(|z| z.re.abs() <= origin_tol) {
        Verdict::Marginal
    } else {
        Verdict::Stable
    }
}

/// U⁻¹A for a square matrix.
pub fn normalized_matrix(a: &Matrix) -> Result<Matrix> {
    let u = build_u(a)?;
    let n = a.rows();
    let mut out = a.clone();
    for i in 0..n {
        let inv = 1.0 / u[(i, i)];
        for k in 0..n {
            out[(i, k)] *= inv;
        }
    }
    Ok(out)
}

/// Infinite-gain pole law `s = −f_gbwp · λ(U⁻¹A)`.
pub fn ideal_inversion_poles(a: &Matrix, f_gbwp: f64) -> Result<Vec<Complex64>> {
    Ok(eigenvalues(&normalized_matrix(a)?)?
        .values
        .into_iter()
        .map(|z| -z * f_gbwp)
        .collect())
}

/// `ln(100) / (f_gbwp · λ_min)`: the 1% settling time of a single mode at
/// the dominant pole.
pub fn response_bound(lambda_min: f64, f_gbwp: f64) -> Result<f64> {
    if !(lambda_min > 0.0) {
        return Err(AmcError::InvalidParameter(format!(
            "lambda_min must be positive for a bounded response, got {lambda_min}"
        )));
    }
    Ok(LN_100 / (f_gbwp * lambda_min))
}

fn inversion_lambda_min(sys: &CircuitSystem) -> Result<Option<f64>> {
    match sys.topology {
        Topology::Inversion => {
            let a = sys
                .meta
                .matrix
                .as_ref()
                .expect("inversion stores its matrix");
            Ok(Some(eigenvalues(&normalized_matrix(a)?)?.min_real()))
        }
        Topology::InversionSplit => {
            let (p, m) = (
                sys.meta.plus.as_ref().expect("split stores A+"),
                sys.meta.minus.as_ref().expect("split stores A-"),
            );
            let u = build_u(&p.add(m)?)?;
            let mut a = p.sub(m)?;
            for i in 0..a.rows() {
                for k in 0..a.cols() {
                    a[(i, k)] /= u[(i, i)];
                }
            }
            Ok(Some(eigenvalues(&a)?.min_real()))
        }
        _ => Ok(None),
    }
}

pub fn poles(sys: &CircuitSystem) -> Result<PoleReport> {
    let f = sys.oa().f_gbwp;
    poles_with_tol(sys, ORIGIN_TOL_REL * f)
}

pub fn poles_with_tol(sys: &CircuitSystem, origin_tol: f64) -> Result<PoleReport> {
    let spectrum = eigenvalues(&sys.j)?;
    let values = spectrum.values;
    let verdict = verdict(&values, origin_tol);
    let dominant = values
        .iter()
        .filter(|z| z.re.abs() > origin_tol)
        .copied()
        .fold(None::<Complex64>, |best, z| match best {
            Some(b) if b.re >= z.re => Some(b),
            _ => Some(z),
        });
    let bound_time = dominant.filter(|d| d.re < 0.0).map(|d| LN_100 / d.re.abs());
    Ok(PoleReport {
        poles: values.into_iter().map(Pole::from).collect(),
        dominant: dominant.map(Pole::from),
        lambda_min: inversion_lambda_min(sys)?,
        verdict,
        bound_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_inversion, OaParams};
    use crate::device::{map_matrix, DeviceConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn verdict_cases() {
        assert_eq!(
            verdict(&[c(-1.0, 0.0), c(-2.0, 3.0)], 1e-9),
            Verdict::Stable
        );
        assert_eq!(
            verdict(&[c(0.0, 0.0), c(-2.0, 0.0)], 1e-9),
            Verdict::Marginal
        );
        assert_eq!(
            verdict(&[c(1e-3, 0.0), c(-2.0, 0.0)], 1e-9),
            Verdict::Unstable
        );
    }

    #[test]
    fn response_bound_values() {
        let t = response_bound(0.5, 1e6).unwrap();
        assert!((t - 9.21034e-6).abs() < 1e-10);
        assert!((response_bound(1.0, 1e6).unwrap() * 2.0 - t).abs() < 1e-18);
        let ratio = response_bound(0.007, 1e6).unwrap() / response_bound(0.03, 1e6).unwrap();
        assert!((ratio - 0.03 / 0.007).abs() < 1e-12 && ratio > 4.28);
        assert!(response_bound(0.0, 1e6).is_err());
    }

    #[test]
    fn ideal_poles() {
        let p = ideal_inversion_poles(&Matrix::identity(2), 1e6).unwrap();
        assert!(p.iter().all(|z| (z.re + 0.5e6).abs() < 1e-9 && z.im == 0.0));

        let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]).unwrap();
        let p = ideal_inversion_poles(&a, 1.0).unwrap();
        // λ of [[1/2, 1/4], [1/5, 3/5]]: (t ± √(t² − 4d))/2 with t = 1.1, d = 0.25
        let (t, d): (f64, f64) = (1.1, 0.25);
        let disc = (t * t - 4.0 * d).sqrt();
        let mut want = [-(t + disc) / 2.0, -(t - disc) / 2.0];
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(
            (p[0].re - want[0]).abs() < 1e-12 && (p[1].re - want[1]).abs() < 1e-12,
            "{p:?}"
        );
        assert!(ideal_inversion_poles(&Matrix::zeros(1, 2), 1.0).is_err());
    }

    #[test]
    fn inversion_pole_report() {
        let cfg = DeviceConfig {
            g_max: 1.0,
            ..Default::default()
        };
        let oa = OaParams::new(1e6, 1e6, 1.0).unwrap();
        let sys =
            build_inversion(&map_matrix(&Matrix::identity(1), &cfg).unwrap(), &[1.0], oa).unwrap();
        let r = poles(&sys).unwrap();
        assert_eq!(r.poles.len(), 1);
        assert!((r.poles[0].re + 0.5e6).abs() / 0.5e6 < 1e-5);
        assert_eq!(r.verdict, Verdict::Stable);
        assert_eq!(r.lambda_min, Some(0.5));
        assert!((r.bound_time.unwrap() - LN_100 / r.poles[0].re.abs()).abs() < 1e-18);

        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(v["poles"][0]["re"].is_number() && v["poles"][0]["im"].is_number());
        assert_eq!(v["verdict"], "stable");
    }
}

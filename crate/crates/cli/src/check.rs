//! Dry-run validation: everything short of simulating.

use amc_core::circuits::{EigenSign, Topology};
use amc_core::matrix::{eigenvalues, is_positive_definite};
use amc_core::stability::Verdict;
use serde::Serialize;

use crate::runner;
use crate::scenario::Resolved;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub topology: Topology,
    pub shape: [usize; 2],
    pub positive_definite: Option<bool>,
    /// Largest factor the matrix could be scaled by and still fit the
    /// device window.
    pub max_feasible_scale: Option<f64>,
    pub verdict: Option<Verdict>,
    pub bound_time_s: Option<f64>,
    pub findings: Vec<Finding>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.findings.iter().all(|f| f.severity != Severity::Error)
    }
}

fn finding(severity: Severity, field: &str, message: impl Into<String>) -> Finding {
    Finding {
        severity,
        field: field.to_string(),
        message: message.into(),
    }
}

pub fn check(r: &Resolved) -> CheckReport {
    let a = &r.matrix;
    let topo = r.topology();
    let mut findings = Vec::new();

    let positive_definite = if a.is_square() {
        is_positive_definite(a).ok()
    } else {
        None
    };
    if topo.is_inversion() && positive_definite == Some(false) {
        findings.push(finding(
            Severity::Warning,
            "matrix",
            "matrix is not positive definite; the inversion loop may be unstable \
             (the left-inverse topology solves any nonsingular system)",
        ));
    }
    if !topo.uses_split() && !a.is_nonnegative() {
        let (row, col) = crate::scenario::first_negative(a);
        let hint = match topo {
            Topology::Inversion => "inversion_split",
            Topology::Mvm => "mvm_split_col or mvm_split_row",
            _ => "a split topology",
        };
        findings.push(finding(
            Severity::Error,
            "matrix",
            format!("negative entry at ({row}, {col}) cannot map onto one array; use {hint}"),
        ));
    }

    let dev = r.scenario.device;
    let peak = a.max_abs();
    let max_feasible_scale = (peak > 0.0).then(|| dev.g_max_siemens / (dev.g0_siemens * peak));
    if let Some(s) = max_feasible_scale {
        if s < 1.0 {
            findings.push(finding(
                Severity::Error,
                "device.g_max_siemens",
                format!(
                    "largest entry needs {:e} S, above g_max; scale the matrix by at most {s:.4}",
                    peak * dev.g0_siemens
                ),
            ));
        }
    }

    if topo == Topology::Eigenvector {
        eigen_findings(r, &mut findings);
    }
    if let Err(e) = r.validate() {
        if findings.iter().all(|f| f.severity != Severity::Error) {
            findings.push(finding(Severity::Error, "scenario", format!("{e:#}")));
        }
    }

    let mut verdict = None;
    let mut bound_time_s = None;
    if findings.iter().all(|f| f.severity != Severity::Error) {
        match runner::build_system(r) {
            Ok((sys, _)) => match amc_core::stability::poles(&sys) {
                Ok(p) => {
                    verdict = Some(p.verdict);
                    bound_time_s = p.bound_time;
                    let msg = match p.verdict {
                        Verdict::Stable => format!(
                            "stable predicted; dominant pole {:.4e} 1/s, 1% bound {:.4e} s",
                            p.dominant.map(|d| d.re).unwrap_or(f64::NAN),
                            p.bound_time.unwrap_or(f64::NAN)
                        ),
                        Verdict::Marginal => "marginal: poles on the imaginary axis".to_string(),
                        Verdict::Unstable if topo == Topology::Eigenvector => {
                            "growing mode present, as the self-sustained loop requires".to_string()
                        }
                        Verdict::Unstable => {
                            let bad: Vec<String> = p
                                .poles
                                .iter()
                                .filter(|z| z.re > 0.0)
                                .map(|z| format!("{:.4e}{:+.4e}i", z.re, z.im))
                                .collect();
                            format!("unstable: right-half-plane poles {}", bad.join(", "))
                        }
                    };
                    let sev = if p.verdict == Verdict::Unstable && topo != Topology::Eigenvector {
                        Severity::Error
                    } else {
                        Severity::Info
                    };
                    findings.push(finding(sev, "poles", msg));
                }
                Err(e) => findings.push(finding(Severity::Error, "poles", e.to_string())),
            },
            Err(e) => findings.push(finding(Severity::Error, "matrix", format!("{e:#}"))),
        }
    }

    CheckReport {
        topology: topo,
        shape: [a.rows(), a.cols()],
        positive_definite,
        max_feasible_scale,
        verdict,
        bound_time_s,
        findings,
    }
}

fn eigen_findings(r: &Resolved, findings: &mut Vec<Finding>) {
    let Ok(spectrum) = eigenvalues(&r.matrix) else {
        findings.push(finding(
            Severity::Error,
            "matrix",
            "eigenvalues unavailable",
        ));
        return;
    };
    let target = match r.scenario.sign {
        EigenSign::Positive => spectrum.values.iter().map(|z| z.norm()).fold(0.0, f64::max),
        EigenSign::Negative => -spectrum.min_real(),
    };
    let Some(lam) = r.scenario.lambda_mapped else {
        return;
    };
    if lam >= target {
        findings.push(finding(
            Severity::Error,
            "lambda_mapped",
            format!("loop gain <= 1, will decay: lambda_mapped {lam} is not below the target eigenvalue magnitude {target}"),
        ));
    } else {
        findings.push(finding(
            Severity::Info,
            "lambda_mapped",
            format!("delta = {:.4e}", 1.0 - lam / target),
        ));
    }
}

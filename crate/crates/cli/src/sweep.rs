//! Parameter sweeps over one scenario field.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::runner::{self, RunReport};
use crate::scenario::Resolved;

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: RunReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub axis: String,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.report.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "value,settle_time,relative_error,dominant_pole_re,dominant_pole_im,verdict\n",
        );
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for p in &self.points {
            let r = &p.report;
            let dom = r.poles.dominant;
            out.push_str(&format!(
                "{:e},{},{:e},{},{},{}\n",
                p.value,
                opt(r.settle_time_s),
                r.relative_error,
                opt(dom.map(|d| d.re)),
                opt(dom.map(|d| d.im)),
                serde_json::to_value(r.poles.verdict)
                    .expect("verdict serializes")
                    .as_str()
                    .unwrap_or("")
            ));
        }
        out
    }
}

pub fn parse_values(csv: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = csv
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .with_context(|| format!("--values: `{s}` is not a number"))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        bail!("--values: no values given");
    }
    Ok(values)
}

/// Resolves every point up front so that a bad value fails the whole sweep
/// before anything runs.
pub fn plan(base: &Resolved, axis: &str, values: &[f64]) -> Result<Vec<Resolved>> {
    values
        .iter()
        .map(|&v| {
            base.with_axis(axis, v)
                .with_context(|| format!("sweep value {v}"))
        })
        .collect()
}

pub fn run(axis: &str, values: &[f64], plan: &[Resolved]) -> Result<SweepReport> {
    let prepared: Vec<runner::Prepared> = plan
        .iter()
        .zip(values)
        .map(|(r, v)| runner::prepare(r).with_context(|| format!("sweep value {v}")))
        .collect::<Result<_>>()?;
    let points = plan
        .par_iter()
        .zip(prepared.into_par_iter())
        .zip(values.par_iter())
        .map(|((r, p), &value)| {
            runner::execute(r, p)
                .map(|out| SweepPoint {
                    value,
                    report: out.report,
                })
                .with_context(|| format!("sweep value {value}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        axis: axis.to_string(),
        points,
    })
}

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{residual_at, OperatorValue};
use crate::error::{Error, Result};
use crate::family::SolutionKind;
use crate::field::{ScalarField, SpaceTimePoint};
use crate::geometry::{sample_domain, DomainGeometry};
use crate::params::PParams;

/// Sampling and acceptance settings for [`certify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertOptions {
    pub count: usize,
    pub seed: u64,
    pub tol: f64,
    /// Finite-difference step; `1e-4` of the bbox diameter when absent.
    pub step: Option<f64>,
    pub kind: SolutionKind,
    /// Keep one record per sampled point.
    pub per_point: bool,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions {
            count: 10_000,
            seed: 0,
            tol: 1e-8,
            step: None,
            kind: SolutionKind::Supersolution,
            per_point: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Pass,
    Violation,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub x: Vec<f64>,
    pub t: f64,
    /// Signed residual (negated for subsolutions); absent when degenerate.
    pub residual: Option<f64>,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub points_sampled: usize,
    pub min_residual: f64,
    pub violations: usize,
    pub passes: usize,
    pub excluded_degenerate: usize,
    pub tol: f64,
    pub kind: SolutionKind,
    pub step: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<PointRecord>,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn excluded_fraction(&self) -> f64 {
        self.excluded_degenerate as f64 / self.points_sampled as f64
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// One row per record: `x_0,…,x_{n-1},t,residual,status`.
    pub fn to_csv(&self) -> String {
        let n = self.records.first().map_or(0, |r| r.x.len());
        let mut s = String::new();
        for i in 0..n {
            let _ = write!(s, "x_{i},");
        }
        s.push_str("t,residual,status\n");
        for r in &self.records {
            for x in &r.x {
                let _ = write!(s, "{x:e},");
            }
            let res = r.residual.map_or(String::new(), |v| format!("{v:e}"));
            let status = match r.status {
                PointStatus::Pass => "pass",
                PointStatus::Violation => "violation",
                PointStatus::Degenerate => "degenerate",
            };
            let _ = writeln!(s, "{:e},{res},{status}", r.t);
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Samples `domain` and checks `a ∂ₜw - Δ_p w ≥ -tol` (or `≤ tol` for
/// subsolutions). Only points whose whole `±2·step` axis stencil lies in the
/// domain are used.
pub fn certify(
    field: &ScalarField,
    params: &PParams,
    domain: &DomainGeometry,
    opts: &CertOptions,
) -> Result<CertReport> {
    params.validate()?;
    let step = opts.step.unwrap_or(1e-4 * domain.bbox().diameter());
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::param(format!("step must be > 0, got {step}")));
    }
    let dim = domain.n();
    let margin_ok = |z: &SpaceTimePoint| {
        (0..=dim).all(|axis| {
            [-2.0 * step, 2.0 * step]
                .iter()
                .all(|&s| domain.contains(&z.shifted(axis, s)))
        })
    };
    let points = sample_domain(domain, opts.count, opts.seed, margin_ok);
    if points.is_empty() {
        return Err(Error::EmptySample(format!(
            "no point of {} keeps a margin of {} from the boundary",
            domain.label(),
            2.0 * step
        )));
    }
    let sign = match opts.kind {
        SolutionKind::Supersolution => 1.0,
        SolutionKind::Subsolution => -1.0,
    };
    let field = field.clone().with_fd_step(step);
    let evaluated: Vec<Result<Option<f64>>> = points
        .par_iter()
        .map(|z| {
            Ok(match residual_at(&field, params, z, Some(step))? {
                OperatorValue::Finite(r) if r.is_finite() => Some(sign * r),
                OperatorValue::Finite(r) => {
                    return Err(Error::numerical(format!("residual {r} at {z:?}")));
                }
                OperatorValue::Degenerate => None,
            })
        })
        .collect();

    let mut report = CertReport {
        points_sampled: points.len(),
        min_residual: f64::INFINITY,
        violations: 0,
        passes: 0,
        excluded_degenerate: 0,
        tol: opts.tol,
        kind: opts.kind,
        step,
        seed: opts.seed,
        records: Vec::new(),
    };
    for (z, r) in points.iter().zip(evaluated) {
        let r = r?;
        let status = match r {
            None => {
                report.excluded_degenerate += 1;
                PointStatus::Degenerate
            }
            Some(v) => {
                report.min_residual = report.min_residual.min(v);
                if v < -opts.tol {
                    report.violations += 1;
                    PointStatus::Violation
                } else {
                    report.passes += 1;
                    PointStatus::Pass
                }
            }
        };
        if opts.per_point {
            report.records.push(PointRecord {
                x: z.x.clone(),
                t: z.t,
                residual: r,
                status,
            });
        }
    }
    Ok(report)
}

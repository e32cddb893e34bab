use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::BarrierFamily;
use crate::geometry::sample_domain;

/// Sampling sizes for [`check_family_conditions`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionOptions {
    /// Domain samples for the scale, positivity and gauge checks.
    pub samples: usize,
    /// Samples per ball in the limit test.
    pub ball_samples: usize,
    pub seed: u64,
    /// Gauge levels `k`.
    pub gauge_levels: Vec<f64>,
    /// Fraction of the family scale the last ball maximum must fall below.
    pub limit_fraction: f64,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        ConditionOptions {
            samples: 2000,
            ball_samples: 200,
            seed: 0,
            gauge_levels: vec![1.0, 2.0, 4.0, 8.0],
            limit_fraction: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeRow {
    pub k: f64,
    pub j: u64,
    /// `min (w_j − k·d)` over the samples.
    pub min_margin: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub j: u64,
    /// `max w_j` over domain samples.
    pub scale: f64,
    /// `(r, max w_j)` over samples within distance `r` of the base point.
    pub limit: Vec<(f64, f64)>,
    pub limit_ok: bool,
    pub positivity_violations: usize,
    pub gauge: Vec<GaugeRow>,
}

impl ConditionReport {
    pub fn gauge_ok(&self) -> bool {
        self.gauge.iter().all(|g| g.violations == 0)
    }

    pub fn passed(&self) -> bool {
        self.limit_ok && self.gauge_ok() && self.positivity_violations == 0
    }
}

/// Checks vanishing at the base point, positivity and the gauge bound
/// `w_{j(k)} ≥ k·d` for one family by sampling.
pub fn check_family_conditions(family: &BarrierFamily, j: u64, opts: &ConditionOptions) -> Result<ConditionReport> {
    let points = sample_domain(&family.domain, opts.samples, opts.seed, |_| true);
    if points.is_empty() {
        return Err(Error::EmptySample(format!("no samples in {}", family.domain.label())));
    }
    let w = family.member(j)?;
    let values: Vec<f64> = points.iter().map(|z| w.value(z)).collect();
    let scale = values.iter().cloned().fold(0.0, f64::max);
    let positivity_violations = values.iter().filter(|v| !(**v > 0.0)).count();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut limit = Vec::new();
    for r in family.limit_radii() {
        let mut best: f64 = 0.0;
        let mut found = 0;
        for _ in 0..opts.ball_samples {
            if let Some(z) = family.sample_near(r, &mut rng) {
                best = best.max(w.value(&z));
                found += 1;
            }
        }
        if found == 0 {
            return Err(Error::EmptySample(format!(
                "no domain point within {r} of the base point"
            )));
        }
        limit.push((r, best));
    }
    let decreasing = limit.windows(2).all(|p| p[1].1 <= p[0].1);
    let last = limit.last().map_or(f64::INFINITY, |l| l.1);
    let limit_ok = decreasing && last < opts.limit_fraction * scale;

    let mut gauge = Vec::new();
    for &k in &opts.gauge_levels {
        let jk = family.index_for_gauge(k)?;
        let wk = family.member(jk)?;
        let mut min_margin = f64::INFINITY;
        let mut violations = 0;
        for z in &points {
            let v = wk.value(z);
            let margin = v - k * family.gauge(z);
            min_margin = min_margin.min(margin);
            if margin < -1e-12 * v.abs().max(1.0) || margin.is_nan() {
                violations += 1;
            }
        }
        gauge.push(GaugeRow {
            k,
            j: jk,
            min_margin,
            violations,
        });
    }

    Ok(ConditionReport {
        j,
        scale,
        limit,
        limit_ok,
        positivity_violations,
        gauge,
    })
}

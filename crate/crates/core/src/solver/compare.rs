use serde::{Deserialize, Serialize};

use super::scheme::{resolve_delta, solve_masked_coupled};
use super::{solve_masked, BoundaryData, SolverOptions};
use crate::error::Result;
use crate::field::SpaceTimePoint;
use crate::geometry::SpaceTimeMask;
use crate::params::PParams;

/// Ordering of two discrete solutions computed in lockstep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `min (u₂ − u₁)` over all active cells and levels.
    pub min_slack: f64,
    pub max_slack: f64,
    /// `(level, cell)` where the slack is smallest.
    pub worst: Option<(usize, usize)>,
    pub tol: f64,
    pub holds: bool,
    pub steps: usize,
}

/// Solves with `g1 ≤ g2` on one mask and checks `u₁ ≤ u₂ + tol` everywhere.
pub fn check_comparison(
    params: &PParams,
    mask: &SpaceTimeMask,
    g1: BoundaryData<'_>,
    g2: BoundaryData<'_>,
    tol: f64,
    opts: &SolverOptions,
) -> Result<ComparisonReport> {
    let sols = solve_masked_coupled(params, mask, &[g1, g2], opts)?;
    let mut min_slack = f64::INFINITY;
    let mut max_slack = f64::NEG_INFINITY;
    let mut worst = None;
    for k in 0..mask.levels() {
        for c in mask.active_cells(k) {
            let s = sols[1].values[k][c] - sols[0].values[k][c];
            if s < min_slack {
                min_slack = s;
                worst = Some((k, c));
            }
            max_slack = max_slack.max(s);
        }
    }
    Ok(ComparisonReport {
        min_slack,
        max_slack,
        worst,
        tol,
        holds: min_slack >= -tol,
        steps: sols[0].steps(),
    })
}

/// Discrepancy between the multiplied run and the rescaled plain run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub a_mult: f64,
    /// `a^{1/(p-2)}`.
    pub factor: f64,
    /// `max |u_ii − factor·u_i|` divided by `factor · data_scale`.
    pub discrepancy: f64,
    /// `max |u_i|` over active cells (1 if that is zero).
    pub data_scale: f64,
    pub steps: usize,
    pub delta_plain: f64,
    pub delta_multiplied: f64,
}

/// Runs (i) `a ∂ₜu = Δ_p u` with data `f` and (ii) the equation multiplied by
/// `a_mult` with data `a_mult^{1/(p-2)} f`, regularization scaled by the same
/// factor and the dt history of (i) replayed, then compares.
pub fn check_scaling_identity(
    params: &PParams,
    a_mult: f64,
    mask: &SpaceTimeMask,
    f: BoundaryData<'_>,
    opts: &SolverOptions,
) -> Result<ScalingReport> {
    params.require_p_ne_2("the scaling identity")?;
    let multiplied = params.with_a(params.a * a_mult)?;
    let factor = a_mult.powf(1.0 / (params.p - 2.0));
    let delta = resolve_delta(opts, mask.h)?;
    let plain_opts = SolverOptions {
        delta: Some(delta),
        ..opts.clone()
    };
    let plain = solve_masked(params, mask, f, &plain_opts)?;
    let scaled_data = |z: &SpaceTimePoint| factor * f(z);
    let scaled_opts = SolverOptions {
        delta: Some(factor * delta),
        dt_replay: Some(plain.dt_history.clone()),
        ..opts.clone()
    };
    let scaled = solve_masked(&multiplied, mask, &scaled_data, &scaled_opts)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..mask.levels() {
        for c in mask.active_cells(k) {
            let (ui, uii) = (plain.values[k][c], scaled.values[k][c]);
            worst = worst.max((uii - factor * ui).abs());
            scale = scale.max(ui.abs());
        }
    }
    let data_scale = if scale > 0.0 { scale } else { 1.0 };
    Ok(ScalingReport {
        a_mult,
        factor,
        discrepancy: worst / (factor * data_scale),
        data_scale,
        steps: plain.steps(),
        delta_plain: delta,
        delta_multiplied: factor * delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_domain, rasterize, uniform_levels, DomainSpec};

    fn mask() -> SpaceTimeMask {
        let d = make_domain(&DomainSpec::Box {
            lo: vec![0.0],
            hi: vec![1.0],
            t0: 0.0,
            t1: 0.05,
        })
        .unwrap();
        rasterize(&d, 0.05, &uniform_levels(0.0, 0.05, 5)).unwrap()
    }

    #[test]
    fn unit_multiplier_is_exact() {
        let params = PParams::new(3.0, 1).unwrap();
        let f = |z: &SpaceTimePoint| (z.x[0] - 0.3).abs() + z.t;
        let r = check_scaling_identity(&params, 1.0, &mask(), &f, &SolverOptions::default()).unwrap();
        assert_eq!(r.discrepancy, 0.0);
    }

    #[test]
    fn scaling_rejects_p_two() {
        let params = PParams::new(2.0, 1).unwrap();
        let f = |_: &SpaceTimePoint| 0.0;
        assert!(check_scaling_identity(&params, 2.0, &mask(), &f, &SolverOptions::default()).is_err());
    }

    #[test]
    fn zero_below_distance_datum() {
        let params = PParams::new(3.0, 1).unwrap();
        let g1 = |_: &SpaceTimePoint| 0.0;
        let g2 = |z: &SpaceTimePoint| z.distance(&SpaceTimePoint::new(vec![0.0], 0.0));
        let r = check_comparison(&params, &mask(), &g1, &g2, 0.0, &SolverOptions::default()).unwrap();
        assert!(r.holds, "{r:?}");
    }
}

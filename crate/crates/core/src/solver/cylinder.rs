use serde::{Deserialize, Serialize};

use super::scheme::{cfl_dt, check_replay, face_speed, flux, next_dt, resolve_delta, update};
use super::{BoundaryData, GridSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::field::SpaceTimePoint;
use crate::geometry::{make_domain, rasterize, uniform_levels, DomainSpec};
use crate::params::PParams;

/// Grid for [`solve_cylinder_1d`]: spacing and number of output levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderGrid {
    pub h: f64,
    pub levels: usize,
}

/// Solves `a ∂ₜu = Δ_p u` on `(a, b) × (t0, t1)` with `u = g` on the parabolic
/// boundary. Lateral data enter through ghost cells at `a − h/2` and `b + h/2`.
///
/// This is a dedicated one-dimensional loop; on the same box mask and dt
/// history it reproduces [`super::solve_masked`] bit for bit.
pub fn solve_cylinder_1d(
    params: &PParams,
    interval: (f64, f64),
    time: (f64, f64),
    g: BoundaryData<'_>,
    grid: CylinderGrid,
    opts: &SolverOptions,
) -> Result<GridSolution> {
    params.validate()?;
    if params.n != 1 {
        return Err(Error::param(format!("cylinder solver needs n = 1, got {}", params.n)));
    }
    let (a, b) = interval;
    let h = grid.h;
    if !(b > a && h > 0.0 && h.is_finite()) {
        return Err(Error::param(format!("need a < b and h > 0, got ({a}, {b}), h = {h}")));
    }
    let cells = (b - a) / h;
    if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
        return Err(Error::param(format!("h = {h} does not divide b − a = {}", b - a)));
    }
    let domain = make_domain(&DomainSpec::Box {
        lo: vec![a],
        hi: vec![b],
        t0: time.0,
        t1: time.1,
    })?;
    let mask = rasterize(&domain, h, &uniform_levels(time.0, time.1, grid.levels))?;
    let delta = resolve_delta(opts, h)?;
    check_replay(opts, mask.levels())?;
    let nc = mask.shape[0];
    let centers: Vec<Vec<f64>> = (0..nc).map(|c| mask.center(c)).collect();
    let left = mask.center_of(&[-1]);
    let right = mask.center_of(&[nc as i64]);
    let (p, d2) = (params.p, delta * delta);

    let mut u: Vec<f64> = centers
        .iter()
        .map(|x| g(&SpaceTimePoint::new(x.clone(), mask.times[0])))
        .collect();
    // Padded copy: ghost, cells, ghost.
    let mut w = vec![0.0; nc + 2];
    let mut fluxes = vec![0.0; nc + 1];
    let mut values = Vec::with_capacity(mask.levels());
    let mut history = Vec::with_capacity(mask.levels());
    let mut total_steps = 0usize;

    for k in 0..mask.levels() {
        let t_end = mask.times[k + 1];
        let replay = opts.dt_replay.as_ref().map(|r| r[k].as_slice());
        let mut dts = Vec::new();
        let mut t = mask.times[k];
        if !replay.is_some_and(|r| r.is_empty()) {
            loop {
                w[0] = g(&SpaceTimePoint::new(left.clone(), t));
                w[nc + 1] = g(&SpaceTimePoint::new(right.clone(), t));
                w[1..=nc].copy_from_slice(&u);
                for (i, f) in fluxes.iter_mut().enumerate() {
                    let s = (w[i + 1] - w[i]) / h;
                    *f = flux(p, d2, s, s * s);
                }
                let adaptive = || {
                    if p < 2.0 {
                        return cfl_dt(params, h, opts.cfl, face_speed(p, d2, 0.0));
                    }
                    let speed = (0..=nc)
                        .map(|i| {
                            let s = (w[i + 1] - w[i]) / h;
                            face_speed(p, d2, s * s)
                        })
                        .fold(0.0, f64::max);
                    cfl_dt(params, h, opts.cfl, speed)
                };
                let (dt, last) = next_dt(replay, dts.len(), adaptive, t, t_end)?;
                let coef = dt / (params.a * h);
                for i in 0..nc {
                    let v = update(w[i + 1], coef, fluxes[i + 1], fluxes[i]);
                    if !v.is_finite() {
                        return Err(Error::NonFiniteState {
                            step: total_steps,
                            t,
                            cell: i,
                        });
                    }
                    if opts.check_max_principle {
                        let lo = w[i].min(w[i + 1]).min(w[i + 2]);
                        let hi = w[i].max(w[i + 1]).max(w[i + 2]);
                        let tol = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
                        if v < lo - tol || v > hi + tol {
                            return Err(Error::MaximumPrinciple {
                                step: total_steps,
                                cell: i,
                                value: v,
                                lo,
                                hi,
                            });
                        }
                    }
                    u[i] = v;
                }
                dts.push(dt);
                total_steps += 1;
                if total_steps > opts.max_steps {
                    return Err(Error::numerical(format!(
                        "step budget of {} exhausted at t = {t}",
                        opts.max_steps
                    )));
                }
                if last {
                    break;
                }
                t += dt;
            }
        }
        values.push(u.clone());
        history.push(dts);
    }

    Ok(GridSolution {
        mask,
        params: *params,
        delta,
        values,
        dt_history: history,
    })
}

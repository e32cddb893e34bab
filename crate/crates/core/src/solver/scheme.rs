use std::collections::HashMap;

use rayon::prelude::*;

use super::{BoundaryData, GridSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::field::SpaceTimePoint;
use crate::geometry::SpaceTimeMask;
use crate::params::PParams;

const PARALLEL_MIN_CELLS: usize = 4096;

/// `Φ_δ` at a face with normal difference quotient `s` and squared gradient
/// magnitude `g2` (equal to `s²` in one dimension).
#[inline]
pub fn flux(p: f64, delta2: f64, s: f64, g2: f64) -> f64 {
    half_power(g2 + delta2, p - 2.0) * s
}

/// `Φ_δ'(s) = (s²+δ²)^{(p-4)/2}((p-1)s² + δ²)`.
#[inline]
pub fn flux_derivative(p: f64, delta2: f64, g2: f64) -> f64 {
    half_power(g2 + delta2, p - 4.0) * ((p - 1.0) * g2 + delta2)
}

/// `x^{e/2}` with exact shortcuts for the exponents used most.
#[inline]
fn half_power(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == 1.0 {
        x.sqrt()
    } else if e == 2.0 {
        x
    } else if e == -1.0 {
        1.0 / x.sqrt()
    } else if e == -0.5 {
        1.0 / x.sqrt().sqrt()
    } else {
        x.powf(0.5 * e)
    }
}

/// Bound on `Φ_δ'` over a face: for `p < 2` the global maximum `δ^{p-2}`.
#[inline]
pub(super) fn face_speed(p: f64, delta2: f64, g2: f64) -> f64 {
    if p < 2.0 {
        delta2.powf(0.5 * (p - 2.0))
    } else {
        flux_derivative(p, delta2, g2)
    }
}

pub(super) fn cfl_dt(params: &PParams, h: f64, cfl: f64, max_speed: f64) -> f64 {
    cfl * params.a * h * h / (params.n as f64 * max_speed)
}

/// `u + dt/(a h) (F₊ − F₋)`, the shared conservative update.
#[inline]
pub(super) fn update(u: f64, coef: f64, f_plus: f64, f_minus: f64) -> f64 {
    u + coef * (f_plus - f_minus)
}

pub(super) fn resolve_delta(opts: &SolverOptions, h: f64) -> Result<f64> {
    let delta = opts.delta.unwrap_or(h);
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::param(format!("flux regularization δ must be > 0, got {delta}")));
    }
    if !(opts.cfl > 0.0 && opts.cfl <= 0.5) {
        return Err(Error::param(format!(
            "CFL factor must lie in (0, 0.5], got {}",
            opts.cfl
        )));
    }
    Ok(delta)
}

pub(super) fn check_replay(opts: &SolverOptions, levels: usize) -> Result<()> {
    if let Some(r) = &opts.dt_replay {
        if r.len() != levels {
            return Err(Error::param(format!(
                "dt replay has {} levels, the mask has {levels}",
                r.len()
            )));
        }
    }
    Ok(())
}

/// Picks the next step inside a slab ending at `t_end`. Returns `(dt, last)`.
pub(super) fn next_dt(
    replay: Option<&[f64]>,
    step_in_level: usize,
    adaptive: impl FnOnce() -> f64,
    t: f64,
    t_end: f64,
) -> Result<(f64, bool)> {
    if let Some(r) = replay {
        let dt = *r
            .get(step_in_level)
            .ok_or_else(|| Error::param("dt replay ended before the level did"))?;
        return Ok((dt, step_in_level + 1 == r.len()));
    }
    let rem = t_end - t;
    let dt = adaptive();
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::numerical(format!("step size {dt} at t = {t}")));
    }
    // Absorb a sliver below 1e-9 of a step into the current one.
    if dt >= rem * (1.0 - 1e-9) {
        Ok((rem, true))
    } else {
        Ok((dt, false))
    }
}

/// Which slot of the work vector feeds each neighbour of an active cell.
struct LevelStencil {
    active: Vec<usize>,
    /// `2n` face neighbours per active cell: `-x, +x[, -y, +y]`.
    faces: Vec<usize>,
    /// Four diagonal neighbours per cell in two dimensions:
    /// `(-x,-y), (-x,+y), (+x,-y), (+x,+y)`.
    diags: Vec<usize>,
    ghost_centers: Vec<Vec<f64>>,
}

impl LevelStencil {
    fn build(mask: &SpaceTimeMask, k: usize) -> Self {
        let n = mask.n;
        let active = mask.active_cells(k);
        let mut slot_of: HashMap<usize, usize> = HashMap::with_capacity(active.len());
        for (s, &c) in active.iter().enumerate() {
            slot_of.insert(c, s);
        }
        let mut ghosts: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut ghost_centers = Vec::new();
        let mut slot = |idx: Vec<i64>| -> usize {
            let on_grid = idx.iter().zip(&mask.shape).all(|(&i, &s)| i >= 0 && (i as usize) < s);
            if on_grid {
                let flat = mask.ravel(&idx.iter().map(|&i| i as usize).collect::<Vec<_>>());
                if let Some(&s) = slot_of.get(&flat) {
                    return s;
                }
            }
            let next = active.len() + ghost_centers.len();
            *ghosts.entry(idx.clone()).or_insert_with(|| {
                ghost_centers.push(mask.center_of(&idx));
                next
            })
        };
        let mut faces = Vec::with_capacity(active.len() * 2 * n);
        let mut diags = Vec::with_capacity(if n == 2 { active.len() * 4 } else { 0 });
        for &c in &active {
            let base: Vec<i64> = mask.unravel(c).into_iter().map(|i| i as i64).collect();
            for d in 0..n {
                for step in [-1, 1] {
                    let mut idx = base.clone();
                    idx[d] += step;
                    faces.push(slot(idx));
                }
            }
            if n == 2 {
                for sx in [-1, 1] {
                    for sy in [-1, 1] {
                        diags.push(slot(vec![base[0] + sx, base[1] + sy]));
                    }
                }
            }
        }
        LevelStencil {
            active,
            faces,
            diags,
            ghost_centers,
        }
    }
}

/// One explicit substep for the active slots of `w`. Returns the new values
/// and, when `check` is set, the first maximum-principle violation.
struct StepOutput {
    values: Vec<f64>,
    violation: Option<(usize, f64, f64, f64)>,
}

struct Kernel<'a> {
    p: f64,
    delta2: f64,
    h: f64,
    n: usize,
    st: &'a LevelStencil,
}

impl Kernel<'_> {
    /// Face gradients of cell slot `i`: `(s, |∇u|²)` for `-x, +x[, -y, +y]`.
    fn faces(&self, w: &[f64], i: usize) -> [(f64, f64); 4] {
        let h = self.h;
        let f = &self.st.faces[2 * self.n * i..2 * self.n * (i + 1)];
        let u = w[i];
        let mut out = [(0.0, 0.0); 4];
        if self.n == 1 {
            let sm = (u - w[f[0]]) / h;
            let sp = (w[f[1]] - u) / h;
            out[0] = (sm, sm * sm);
            out[1] = (sp, sp * sp);
            return out;
        }
        let dg = &self.st.diags[4 * i..4 * i + 4];
        let (xm, xp, ym, yp) = (w[f[0]], w[f[1]], w[f[2]], w[f[3]]);
        let (mm, mp, pm, pp) = (w[dg[0]], w[dg[1]], w[dg[2]], w[dg[3]]);
        let q = 4.0 * h;
        // Tangential differences are written as (left cell) + (right cell)
        // so both cells sharing a face evaluate the same expression.
        let sxm = (u - xm) / h;
        let txm = ((mp - mm) + (yp - ym)) / q;
        let sxp = (xp - u) / h;
        let txp = ((yp - ym) + (pp - pm)) / q;
        let sym = (u - ym) / h;
        let tym = ((pm - mm) + (xp - xm)) / q;
        let syp = (yp - u) / h;
        let typ = ((xp - xm) + (pp - mp)) / q;
        out[0] = (sxm, sxm * sxm + txm * txm);
        out[1] = (sxp, sxp * sxp + txp * txp);
        out[2] = (sym, sym * sym + tym * tym);
        out[3] = (syp, syp * syp + typ * typ);
        out
    }

    fn max_speed(&self, w: &[f64]) -> f64 {
        if self.p < 2.0 {
            return face_speed(self.p, self.delta2, 0.0);
        }
        let m = self.st.active.len();
        let speed = |i: usize| {
            let fc = self.faces(w, i);
            fc[..2 * self.n]
                .iter()
                .map(|&(_, g2)| face_speed(self.p, self.delta2, g2))
                .fold(0.0, f64::max)
        };
        if m >= PARALLEL_MIN_CELLS {
            (0..m).into_par_iter().map(speed).reduce(|| 0.0, f64::max)
        } else {
            (0..m).map(speed).fold(0.0, f64::max)
        }
    }

    fn new_value(&self, w: &[f64], i: usize, coef: f64) -> f64 {
        let fc = self.faces(w, i);
        let fl = |k: usize| flux(self.p, self.delta2, fc[k].0, fc[k].1);
        if self.n == 1 {
            update(w[i], coef, fl(1), fl(0))
        } else {
            w[i] + coef * ((fl(1) - fl(0)) + (fl(3) - fl(2)))
        }
    }

    fn bounds(&self, w: &[f64], i: usize) -> (f64, f64) {
        let f = &self.st.faces[2 * self.n * i..2 * self.n * (i + 1)];
        f.iter().fold((w[i], w[i]), |(lo, hi), &s| (lo.min(w[s]), hi.max(w[s])))
    }

    fn step(&self, w: &[f64], coef: f64, check: bool) -> StepOutput {
        let m = self.st.active.len();
        let cell = |i: usize| {
            let v = self.new_value(w, i, coef);
            let bad = if check && v.is_finite() {
                let (lo, hi) = self.bounds(w, i);
                let tol = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
                (v < lo - tol || v > hi + tol).then_some((lo, hi))
            } else {
                None
            };
            (v, bad)
        };
        let out: Vec<(f64, Option<(f64, f64)>)> = if m >= PARALLEL_MIN_CELLS {
            (0..m).into_par_iter().map(cell).collect()
        } else {
            (0..m).map(cell).collect()
        };
        let violation = out
            .iter()
            .enumerate()
            .find_map(|(i, (v, b))| b.map(|(lo, hi)| (i, *v, lo, hi)));
        StepOutput {
            values: out.into_iter().map(|(v, _)| v).collect(),
            violation,
        }
    }
}

/// Solves `a ∂ₜu = Δ_p u` on the active cells of `mask` with data `g` on
/// ghost cells and newly exposed cells.
pub fn solve_masked(
    params: &PParams,
    mask: &SpaceTimeMask,
    g: BoundaryData<'_>,
    opts: &SolverOptions,
) -> Result<GridSolution> {
    Ok(solve_masked_coupled(params, mask, &[g], opts)?.remove(0))
}

/// Advances several data sets on one mask in lockstep, each substep using
/// the smallest adaptive step over all states, so that the runs share one dt
/// history and can be compared cell by cell.
pub fn solve_masked_coupled(
    params: &PParams,
    mask: &SpaceTimeMask,
    data: &[BoundaryData<'_>],
    opts: &SolverOptions,
) -> Result<Vec<GridSolution>> {
    params.validate()?;
    if mask.n != params.n {
        return Err(Error::param(format!(
            "mask dimension {} does not match n = {}",
            mask.n, params.n
        )));
    }
    if !(1..=2).contains(&mask.n) {
        return Err(Error::param(format!(
            "the solver supports n ∈ {{1, 2}}, got {}",
            mask.n
        )));
    }
    if data.is_empty() {
        return Err(Error::param("no boundary data given"));
    }
    let h = mask.h;
    let delta = resolve_delta(opts, h)?;
    check_replay(opts, mask.levels())?;
    let cells = mask.cell_count();
    let mut values: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(mask.levels()); data.len()];
    let mut history: Vec<Vec<f64>> = Vec::with_capacity(mask.levels());
    let mut total_steps = 0usize;

    for k in 0..mask.levels() {
        let st = LevelStencil::build(mask, k);
        let m = st.active.len();
        let kernel = Kernel {
            p: params.p,
            delta2: delta * delta,
            h,
            n: mask.n,
            st: &st,
        };
        let (t_start, t_end) = (mask.times[k], mask.times[k + 1]);
        let mut ws: Vec<Vec<f64>> = data
            .iter()
            .enumerate()
            .map(|(s, g)| {
                let mut w = vec![0.0; m + st.ghost_centers.len()];
                for (i, &c) in st.active.iter().enumerate() {
                    let carried = (k > 0 && mask.active[k - 1][c]).then(|| values[s][k - 1][c]);
                    w[i] = carried.unwrap_or_else(|| g(&SpaceTimePoint::new(mask.center(c), t_start)));
                }
                w
            })
            .collect();
        let replay = opts.dt_replay.as_ref().map(|r| r[k].as_slice());
        let mut dts = Vec::new();
        let mut t = t_start;
        if m > 0 && !(replay.is_some_and(|r| r.is_empty())) {
            loop {
                for (w, g) in ws.iter_mut().zip(data) {
                    for (q, x) in st.ghost_centers.iter().enumerate() {
                        w[m + q] = g(&SpaceTimePoint::new(x.clone(), t));
                    }
                }
                let adaptive = || {
                    let speed = ws.iter().map(|w| kernel.max_speed(w)).fold(0.0, f64::max);
                    cfl_dt(params, h, opts.cfl, speed)
                };
                let (dt, last) = next_dt(replay, dts.len(), adaptive, t, t_end)?;
                let coef = dt / (params.a * h);
                for w in ws.iter_mut() {
                    let out = kernel.step(w, coef, opts.check_max_principle);
                    if let Some(i) = out.values.iter().position(|v| !v.is_finite()) {
                        return Err(Error::NonFiniteState {
                            step: total_steps,
                            t,
                            cell: st.active[i],
                        });
                    }
                    if let Some((i, value, lo, hi)) = out.violation {
                        return Err(Error::MaximumPrinciple {
                            step: total_steps,
                            cell: st.active[i],
                            value,
                            lo,
                            hi,
                        });
                    }
                    w[..m].copy_from_slice(&out.values);
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
        for (s, w) in ws.iter().enumerate() {
            let mut level = vec![f64::NAN; cells];
            for (i, &c) in st.active.iter().enumerate() {
                level[c] = w[i];
            }
            values[s].push(level);
        }
        history.push(dts);
    }

    Ok(values
        .into_iter()
        .map(|v| GridSolution {
            mask: mask.clone(),
            params: *params,
            delta,
            values: v,
            dt_history: history.clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_domain, rasterize, uniform_levels, DomainSpec};

    fn box_mask(n: usize, h: f64, t1: f64, levels: usize) -> SpaceTimeMask {
        let d = make_domain(&DomainSpec::Box {
            lo: vec![0.0; n],
            hi: vec![1.0; n],
            t0: 0.0,
            t1,
        })
        .unwrap();
        rasterize(&d, h, &uniform_levels(0.0, t1, levels)).unwrap()
    }

    #[test]
    fn flux_derivative_matches_difference_quotient() {
        for p in [1.5, 2.0, 3.0, 4.0] {
            for s in [-1.3, -0.2, 0.0, 0.4, 2.0] {
                let d2 = 0.01;
                let e = 1e-6;
                let fd = (flux(p, d2, s + e, (s + e) * (s + e)) - flux(p, d2, s - e, (s - e) * (s - e))) / (2.0 * e);
                assert!((fd - flux_derivative(p, d2, s * s)).abs() < 1e-6 * fd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn linear_state_is_stationary_in_2d() {
        let params = PParams::new(3.0, 2).unwrap();
        let mask = box_mask(2, 0.1, 0.05, 2);
        let g = |z: &SpaceTimePoint| 0.3 * z.x[0] - 0.7 * z.x[1] + 0.1;
        let sol = solve_masked(&params, &mask, &g, &SolverOptions::default()).unwrap();
        for (c, v) in sol.final_values() {
            let x = mask.center(c);
            assert!((v - g(&SpaceTimePoint::new(x, 0.0))).abs() < 1e-12);
        }
    }

    #[test]
    fn additive_shift_is_exact_and_coupled_steps_agree() {
        let params = PParams::new(1.5, 1).unwrap();
        let mask = box_mask(1, 0.05, 0.01, 3);
        let g1 = |z: &SpaceTimePoint| (3.0 * z.x[0]).sin() + z.t;
        let g2 = |z: &SpaceTimePoint| (3.0 * z.x[0]).sin() + z.t + 1.0;
        let sols = solve_masked_coupled(&params, &mask, &[&g1, &g2], &SolverOptions::default()).unwrap();
        assert_eq!(sols[0].dt_history, sols[1].dt_history);
        for k in 0..mask.levels() {
            for c in mask.active_cells(k) {
                assert!((sols[1].values[k][c] - sols[0].values[k][c] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conservative_telescoping_in_one_step() {
        // Sum of updates equals the net boundary flux.
        let params = PParams::new(3.0, 1).unwrap();
        let mask = box_mask(1, 0.1, 1e-4, 1);
        let g = |z: &SpaceTimePoint| (z.x[0] * 5.0).cos();
        let opts = SolverOptions {
            dt_replay: Some(vec![vec![1e-4]]),
            ..Default::default()
        };
        let sol = solve_masked(&params, &mask, &g, &opts).unwrap();
        let u0: Vec<f64> = (0..10).map(|c| g(&SpaceTimePoint::new(mask.center(c), 0.0))).collect();
        let gl = g(&SpaceTimePoint::new(vec![-0.05], 0.0));
        let gr = g(&SpaceTimePoint::new(vec![1.05], 0.0));
        let d2 = 0.01;
        let fl = flux(3.0, d2, (u0[0] - gl) / 0.1, ((u0[0] - gl) / 0.1).powi(2));
        let fr = flux(3.0, d2, (gr - u0[9]) / 0.1, ((gr - u0[9]) / 0.1).powi(2));
        let change: f64 = (0..10).map(|c| sol.values[0][c] - u0[c]).sum();
        assert!((change - 1e-4 / 0.1 * (fr - fl)).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = PParams::new(3.0, 2).unwrap();
        let mask = box_mask(1, 0.1, 0.1, 1);
        let g = |_: &SpaceTimePoint| 0.0;
        assert!(solve_masked(&params, &mask, &g, &SolverOptions::default()).is_err());
        let params = PParams::new(3.0, 1).unwrap();
        let bad = SolverOptions {
            delta: Some(0.0),
            ..Default::default()
        };
        assert!(solve_masked(&params, &mask, &g, &bad).is_err());
    }

    #[test]
    fn non_finite_data_aborts_with_step() {
        let params = PParams::new(3.0, 1).unwrap();
        let mask = box_mask(1, 0.1, 0.1, 1);
        let g = |z: &SpaceTimePoint| if z.x[0] > 1.0 { f64::NAN } else { 0.0 };
        let opts = SolverOptions {
            check_max_principle: false,
            dt_replay: Some(vec![vec![1e-3]]),
            ..Default::default()
        };
        match solve_masked(&params, &mask, &g, &opts) {
            Err(Error::NonFiniteState { step: 0, cell: 9, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}

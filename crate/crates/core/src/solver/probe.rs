use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_masked, GridSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::field::SpaceTimePoint;
use crate::geometry::{make_domain, rasterize, uniform_levels, DomainGeometry, DomainSpec, SpaceTimeBox};
use crate::params::PParams;

/// Probe outcome. Verdicts are finite-grid indications only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConsistentWithRegular,
    ConsistentWithIrregular,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ConsistentWithRegular => "consistent-with-regular",
            Verdict::ConsistentWithIrregular => "consistent-with-irregular",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    /// Exponent of the datum `|ξ − ξ₀|^α`.
    pub alpha: f64,
    /// Largest window radius; the others halve it `radii − 1` times.
    pub r_max: f64,
    pub radii: usize,
    /// The solve runs on the domain cut to a box of this half-size around `ξ₀`;
    /// `None` keeps the whole domain.
    pub window: Option<f64>,
    /// Slab thickness in units of `h`.
    pub level_ratio: f64,
    pub solver: SolverOptions,
}

impl ProbeOptions {
    pub fn with_r_max(r_max: f64) -> Self {
        ProbeOptions {
            alpha: 1.0,
            r_max,
            radii: 6,
            window: Some(2.0 * r_max),
            level_ratio: 1.0,
            solver: SolverOptions::default(),
        }
    }

    pub fn radii_list(&self) -> Vec<f64> {
        (0..self.radii).map(|i| self.r_max / 2f64.powi(i as i32)).collect()
    }
}

/// One entry of the `D(r, h)` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub h: f64,
    pub r: f64,
    /// `sup |u|` over active cell values within `r` of `ξ₀`, each taken at the
    /// end time of its level.
    pub deviation: f64,
    /// Number of cell values in the window.
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub target: Vec<f64>,
    pub datum: String,
    /// `r_max^α`, the scale the irregularity threshold refers to.
    pub datum_scale: f64,
    pub radii: Vec<f64>,
    pub refinements: Vec<f64>,
    pub rows: Vec<ProbeRow>,
    pub steps: Vec<usize>,
    pub verdict: Verdict,
    pub reason: String,
}

impl ProbeReport {
    /// `D(r, h)` for refinement `hi` and radius `ri`.
    pub fn deviation(&self, hi: usize, ri: usize) -> f64 {
        self.rows[hi * self.radii.len() + ri].deviation
    }

    /// CSV with header `h,r,deviation,cells`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,r,deviation,cells\n");
        for row in &self.rows {
            let _ = writeln!(s, "{:e},{:e},{:e},{}", row.h, row.r, row.deviation, row.cells);
        }
        s
    }
}

/// The probe datum `g(ξ) = |ξ − ξ₀|^α`.
pub fn distance_datum(xi0: &SpaceTimePoint, alpha: f64) -> impl Fn(&SpaceTimePoint) -> f64 + Sync + '_ {
    move |z: &SpaceTimePoint| z.distance(xi0).powf(alpha)
}

/// Solves with the datum `|ξ − ξ₀|^α` on each grid of the ladder and
/// classifies the decay of `D(r, h)` near `ξ₀`.
///
/// Verdict rules, with `h_f` the finest spacing and `S = r_max^α`:
/// * regular when `D(r_min, h) < 0.1 r_max` on every grid of the ladder and
///   `D(·, h)` decreases with `r` on every grid;
/// * irregular when `D(r, h_f) > 0.25 S` for every `r` and `D(r, ·)` moves by at
///   most 10% between the two finest grids;
/// * inconclusive otherwise, or when a window holds no cells.
pub fn regularity_probe(
    params: &PParams,
    domain: &DomainGeometry,
    xi0: &SpaceTimePoint,
    refinements: &[f64],
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    if refinements.len() < 2 {
        return Err(Error::param("the probe needs at least two grid spacings"));
    }
    if refinements.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::param("grid spacings must decrease strictly"));
    }
    if opts.radii < 3 || !(opts.r_max > 0.0) {
        return Err(Error::param("the probe needs r_max > 0 and at least 3 radii"));
    }
    if xi0.dim() != domain.n() {
        return Err(Error::param("probe point dimension does not match the domain"));
    }
    let work = match opts.window {
        Some(w) => {
            let lo: Vec<f64> = xi0.x.iter().map(|x| x - w).collect();
            let hi: Vec<f64> = xi0.x.iter().map(|x| x + w).collect();
            domain.restricted(&SpaceTimeBox::new(lo, hi, xi0.t - w, xi0.t + w)?)?
        }
        None => domain.clone(),
    };
    let g = distance_datum(xi0, opts.alpha);
    let radii = opts.radii_list();
    let solutions: Vec<GridSolution> = refinements
        .par_iter()
        .map(|&h| {
            let bb = work.bbox();
            let count = ((bb.t1 - bb.t0) / (opts.level_ratio * h)).ceil().max(1.0) as usize;
            let mask = rasterize(&work, h, &uniform_levels(bb.t0, bb.t1, count))?;
            solve_masked(params, &mask, &g, &opts.solver)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (sol, &h) in solutions.iter().zip(refinements) {
        for &r in &radii {
            let (deviation, cells) = window_sup(sol, xi0, r);
            rows.push(ProbeRow { h, r, deviation, cells });
        }
    }
    let datum_scale = opts.r_max.powf(opts.alpha);
    let (verdict, reason) = classify(&rows, refinements.len(), &radii, datum_scale);
    Ok(ProbeReport {
        target: xi0.coords(),
        datum: format!("|xi - xi0|^{}", opts.alpha),
        datum_scale,
        radii,
        refinements: refinements.to_vec(),
        rows,
        steps: solutions.iter().map(GridSolution::steps).collect(),
        verdict,
        reason,
    })
}

fn window_sup(sol: &GridSolution, xi0: &SpaceTimePoint, r: f64) -> (f64, usize) {
    let mask = &sol.mask;
    let mut sup: f64 = 0.0;
    let mut count = 0;
    for k in 0..mask.levels() {
        let t = mask.level_end(k);
        if (t - xi0.t).abs() >= r {
            continue;
        }
        for c in mask.active_cells(k) {
            let z = SpaceTimePoint::new(mask.center(c), t);
            if z.distance(xi0) < r {
                sup = sup.max(sol.values[k][c].abs());
                count += 1;
            }
        }
    }
    (sup, count)
}

fn classify(rows: &[ProbeRow], nh: usize, radii: &[f64], scale: f64) -> (Verdict, String) {
    let nr = radii.len();
    let d = |hi: usize, ri: usize| rows[hi * nr + ri].deviation;
    if let Some(row) = rows.iter().find(|r| r.cells == 0) {
        return (
            Verdict::Inconclusive,
            format!("no cells within r = {:e} at h = {:e}", row.r, row.h),
        );
    }
    let f = nh - 1;
    let r_max = radii[0];
    let d_min = d(f, nr - 1);
    let decreasing = (0..nh).all(|hi| (1..nr).all(|ri| d(hi, ri) <= d(hi, ri - 1)) && d(hi, nr - 1) < d(hi, 0));
    let stable_in_h = (0..nh).all(|hi| d(hi, nr - 1) < 0.1 * r_max);
    if d_min < 0.1 * r_max && decreasing && stable_in_h {
        return (
            Verdict::ConsistentWithRegular,
            format!("D(r_min, h_f) = {d_min:.3e} < 0.1 r_max = {:.3e}", 0.1 * r_max),
        );
    }
    let bounded_below = (0..nr).all(|ri| d(f, ri) > 0.25 * scale);
    let converged = (0..nr).all(|ri| (d(f, ri) - d(f - 1, ri)).abs() <= 0.1 * d(f, ri));
    if bounded_below && converged {
        return (
            Verdict::ConsistentWithIrregular,
            format!("D(r, h_f) ≥ {d_min:.3e} > 0.25 S = {:.3e} at every r", 0.25 * scale),
        );
    }
    (
        Verdict::Inconclusive,
        format!(
            "D(r_min, h_f) = {d_min:.3e}; decreasing in r: {decreasing}; stable in h: {stable_in_h}; \
             bounded below: {bounded_below}; converged: {converged}"
        ),
    )
}

/// A named probe set-up: domain, boundary point and default grid ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeScenario {
    pub domain_name: String,
    pub point_name: String,
    pub params: PParams,
    pub domain: DomainSpec,
    pub point: SpaceTimePoint,
    pub refinements: Vec<f64>,
    pub options: ProbeOptions,
}

/// Domain names accepted by [`probe_scenario`].
pub const PROBE_DOMAINS: [&str; 4] = ["cylinder", "barenblatt_ball", "petrovskii", "singular_final"];

/// Built-in scenarios:
///
/// | domain | point | default p |
/// |---|---|---|
/// | `cylinder` `(0,1)×(0,1)` | `lateral` `(0, ½)`, `earliest` `(½, 0)` | 3 |
/// | `barenblatt_ball` (`T = 0.1`) | `origin-final` | 3 |
/// | `petrovskii` (`K = 10⁻³`, `α = 1`) | `origin-final` | 3 |
/// | `singular_final` (`K = 2`, `l = 1`) | `origin-final` | 1.5 |
pub fn probe_scenario(domain: &str, point: &str, p: Option<f64>) -> Result<ProbeScenario> {
    let origin = SpaceTimePoint::new(vec![0.0], 0.0);
    let unknown = || {
        Error::param(format!(
            "unknown probe scenario {domain}/{point}; domains are {PROBE_DOMAINS:?}"
        ))
    };
    let (default_p, spec_for, xi0, refinements, options): (f64, fn(f64) -> DomainSpec, _, Vec<f64>, _) =
        match (domain, point) {
            ("cylinder", "lateral") => (
                3.0,
                |_| unit_cylinder(),
                SpaceTimePoint::new(vec![0.0], 0.5),
                vec![0.01, 0.005, 0.0025],
                ProbeOptions::with_r_max(0.25),
            ),
            ("cylinder", "earliest") => (
                3.0,
                |_| unit_cylinder(),
                SpaceTimePoint::new(vec![0.5], 0.0),
                vec![0.01, 0.005, 0.0025],
                ProbeOptions {
                    radii: 8,
                    window: None,
                    level_ratio: 0.5,
                    ..ProbeOptions::with_r_max(1.0)
                },
            ),
            ("barenblatt_ball", "origin-final") => (
                3.0,
                |p| DomainSpec::BarenblattBall { p, n: 1, t_span: 0.1 },
                origin,
                vec![0.005, 0.0025, 0.00125],
                ProbeOptions {
                    radii: 4,
                    window: None,
                    level_ratio: 0.25,
                    ..ProbeOptions::with_r_max(0.05)
                },
            ),
            ("petrovskii", "origin-final") => (
                3.0,
                |p| DomainSpec::Petrovskii {
                    k: 1e-3,
                    alpha: 1.0,
                    p,
                    n: 1,
                },
                origin,
                vec![4.6e-4, 2.3e-4, 1.15e-4],
                ProbeOptions {
                    window: None,
                    ..ProbeOptions::with_r_max(0.16)
                },
            ),
            ("singular_final", "origin-final") => (
                1.5,
                |p| DomainSpec::SingularFinal {
                    k: 2.0,
                    l: 1.0,
                    p,
                    n: 1,
                },
                origin,
                vec![0.01, 0.005, 0.0025],
                ProbeOptions {
                    radii: 7,
                    window: Some(0.5),
                    ..ProbeOptions::with_r_max(0.5)
                },
            ),
            _ => return Err(unknown()),
        };
    let p = p.unwrap_or(default_p);
    Ok(ProbeScenario {
        domain_name: domain.to_string(),
        point_name: point.to_string(),
        params: PParams::new(p, 1)?,
        domain: spec_for(p),
        point: xi0,
        refinements,
        options,
    })
}

fn unit_cylinder() -> DomainSpec {
    DomainSpec::Cylinder {
        vertices: vec![vec![0.0], vec![1.0]],
        t0: 0.0,
        t1: 1.0,
    }
}

impl ProbeScenario {
    pub fn run(&self) -> Result<ProbeReport> {
        let domain = make_domain(&self.domain)?;
        regularity_probe(&self.params, &domain, &self.point, &self.refinements, &self.options)
    }
}

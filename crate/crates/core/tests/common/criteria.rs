//! One function per acceptance criterion. Each returns an [`Outcome`] whose
//! detail line is what the acceptance runner prints.

use std::f64::consts::{E, PI};
use std::time::Instant;

use pbl_core::barriers::{
    barenblatt, check_family_conditions, make_family, make_north_pole_family, ConditionOptions, FamilySpec,
    NorthPoleParams, PetrovskiiParams,
};
use pbl_core::geometry::{parabolic_boundary, rasterize, sample_domain, uniform_levels, Cylinder, SpaceTimeMask};
use pbl_core::residual::{certify, residual_at, residual_fd, CertOptions};
use pbl_core::solver::{
    check_comparison, check_scaling_identity, probe_scenario, solve_cylinder_1d, CylinderGrid, SolverOptions, Verdict,
};
use pbl_core::{make_domain, BarrierFamily, DomainGeometry, DomainSpec, PParams, ScalarField, SpaceTimePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{certification_grid, north_pole_spec, P_GRID};

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail }
    }
}

fn timed(f: impl FnOnce() -> (bool, String), budget_s: f64) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = f();
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        ok && secs < budget_s,
        format!("{detail}; {secs:.2}s (budget {budget_s}s)"),
    )
}

/// Sum of `|FD − closed|` residual errors over interior samples at steps
/// `h`, `h/2`, `h/4`.
pub fn fd_errors(params: &PParams, w: &ScalarField, dom: &DomainGeometry, h: f64) -> [f64; 3] {
    let pts = sample_domain(dom, 20, 5, |z| {
        (0..=params.n).all(|ax| [-1.0, 1.0].iter().all(|s| dom.contains(&z.shifted(ax, s * 8.0 * h))))
    });
    assert!(!pts.is_empty(), "no interior samples for {}", w.label());
    let mut e = [0.0f64; 3];
    for z in &pts {
        let exact = residual_at(w, params, z, None).unwrap().finite().unwrap();
        for (i, hh) in [h, h / 2.0, h / 4.0].iter().enumerate() {
            let fd = residual_fd(w, params, z, *hh).unwrap().finite().unwrap();
            e[i] += (fd - exact).abs();
        }
    }
    e
}

/// The fields of the closed-form check with their domains and base steps.
pub fn closed_form_cases() -> Vec<(String, PParams, ScalarField, DomainGeometry, f64)> {
    let mut out = Vec::new();
    for p in P_GRID {
        for n in [1usize, 2] {
            let params = PParams::new(p, n).unwrap();
            let psi = make_family(&params, &FamilySpec::Psi { diam: 1.0, base: None }).unwrap();
            out.push((
                format!("psi p={p} n={n}"),
                params,
                psi.member(3).unwrap(),
                psi.domain.clone(),
                1e-2,
            ));
            let FamilySpec::NorthPole { theta, l, k } = north_pole_spec(p) else {
                unreachable!()
            };
            let np = NorthPoleParams::new(&params, theta, l, k).unwrap();
            let fam = make_north_pole_family(&params, theta, l, k).unwrap();
            out.push((
                format!("north_pole f_j p={p} n={n}"),
                params,
                np.f(fam.j_min),
                fam.domain.clone(),
                1e-2,
            ));
        }
        let params = PParams::new(p, 1).unwrap();
        let cone = make_family(&params, &FamilySpec::Cone1d { gamma: 1.0 }).unwrap();
        out.push((
            format!("cone p={p}"),
            params,
            cone.member(cone.j_min).unwrap(),
            cone.domain.clone(),
            1e-2,
        ));
        if p > 2.0 {
            let petr = make_family(&params, &FamilySpec::Petrovskii { alpha: 1.0, k: 1.0 }).unwrap();
            out.push((
                format!("petrovskii p={p}"),
                params,
                petr.member(petr.j_min).unwrap(),
                petr.domain.clone(),
                1e-3,
            ));
        }
    }
    out
}

pub fn criterion_1() -> Outcome {
    timed(
        || {
            let mut worst: Option<(String, f64)> = None;
            let mut ok = true;
            let cases = closed_form_cases();
            for (name, params, w, dom, h) in &cases {
                let e = fd_errors(params, w, dom, *h);
                for r in [e[0] / e[1], e[1] / e[2]] {
                    if !(2.0..=8.0).contains(&r) {
                        ok = false;
                    }
                    let off = (r - 4.0).abs();
                    if worst.as_ref().is_none_or(|w| off > (w.1 - 4.0).abs()) {
                        worst = Some((name.clone(), r));
                    }
                }
            }
            let (name, r) = worst.unwrap();
            (
                ok,
                format!("{} fields, ratio furthest from 4: {r:.3} ({name})", cases.len()),
            )
        },
        10.0,
    )
}

pub fn criterion_2() -> Outcome {
    timed(
        || {
            let mut ok = true;
            let mut runs = 0;
            let mut max_excl: f64 = 0.0;
            let mut failures = Vec::new();
            for (params, spec) in certification_grid() {
                let fam = make_family(&params, &spec).unwrap();
                for j in [fam.j_min, 2 * fam.j_min, 10 * fam.j_min] {
                    let w = fam.member(j).unwrap();
                    let opts = CertOptions {
                        count: 10_000,
                        seed: 11,
                        tol: 1e-8,
                        kind: fam.kind,
                        ..Default::default()
                    };
                    let r = certify(&w, &params, &fam.domain, &opts).unwrap();
                    runs += 1;
                    max_excl = max_excl.max(r.excluded_fraction());
                    if r.violations > 0 || r.excluded_fraction() >= 0.01 || r.points_sampled < 10_000 {
                        ok = false;
                        failures.push(format!(
                            "{} p={} n={} j={j}: {} violations",
                            spec.name(),
                            params.p,
                            params.n,
                            r.violations
                        ));
                    }
                }
            }
            let mut detail = format!("{runs} runs of 10^4 samples, max excluded fraction {max_excl:.4}");
            if !failures.is_empty() {
                detail.push_str(&format!(", failing: {}", failures.join("; ")));
            }
            (ok, detail)
        },
        120.0,
    )
}

/// Families of the barrier-condition check: the certification grid without
/// the exterior ball.
pub fn condition_families() -> Vec<(PParams, FamilySpec, BarrierFamily)> {
    certification_grid()
        .into_iter()
        .filter(|(_, s)| !matches!(s, FamilySpec::ExteriorBall { .. }))
        .map(|(params, spec)| {
            let fam = make_family(&params, &spec).unwrap();
            (params, spec, fam)
        })
        .collect()
}

pub fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut failures = Vec::new();
    let mut worst_limit: f64 = 0.0;
    let fams = condition_families();
    for (params, spec, fam) in &fams {
        let r = check_family_conditions(fam, fam.j_min, &ConditionOptions::default()).unwrap();
        worst_limit = worst_limit.max(r.limit.last().unwrap().1 / r.scale);
        if !r.passed() {
            ok = false;
            failures.push(format!("{} p={} n={}", spec.name(), params.p, params.n));
        }
    }
    let mut detail = format!(
        "{} families, limit and gauge k in {{1,2,4,8}}; worst final ball max / scale {worst_limit:.2e}",
        fams.len()
    );
    if !failures.is_empty() {
        detail.push_str(&format!(", failing: {}", failures.join("; ")));
    }
    Outcome::new(ok, detail)
}

/// `log g(L)` with `L = −log(−t)` for the Petrovskiĭ calibration.
fn log_g(p: f64, n: f64, alpha: f64, lambda: f64, big_l: f64) -> f64 {
    -n * big_l / lambda + alpha * ((big_l.powf(p - 2.0) - 1.0) / (p - 2.0)).ln()
}

/// Golden-section search directly in `t` on `(−1/(2e), 0)` for `sup g`.
pub fn golden_oracle(p: f64, n: f64, alpha: f64) -> f64 {
    let lambda = n * (p - 2.0) + p;
    let g = |t: f64| (-t).powf(n / lambda) * ((-(-t).ln()).powf(p - 2.0) - 1.0).powf(alpha) / (p - 2.0).powf(alpha);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (-1.0 / (2.0 * E), -1e-300);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    for _ in 0..2000 {
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
        if (b - a).abs() < 1e-16 * a.abs() {
            break;
        }
    }
    g(0.5 * (a + b))
}

/// Newton on the derivative of `log g` in `L`.
pub fn newton_oracle(p: f64, n: f64, alpha: f64) -> f64 {
    let lambda = n * (p - 2.0) + p;
    // d/dL log g = −n/λ + α L^{p−3}(p−2)/(L^{p−2} − 1).
    let dlog = |l: f64| -n / lambda + alpha * (p - 2.0) * l.powf(p - 3.0) / (l.powf(p - 2.0) - 1.0);
    let mut l = 4.0;
    for _ in 0..100 {
        let e = 1e-6 * l;
        let slope = (dlog(l + e) - dlog(l - e)) / (2.0 * e);
        let step = dlog(l) / slope;
        l -= step;
        if step.abs() < 1e-15 * l {
            break;
        }
    }
    log_g(p, n, alpha, lambda, l).exp()
}

pub fn criterion_4() -> Outcome {
    timed(
        || {
            let params = PParams::new(3.0, 1).unwrap();
            let pp = PetrovskiiParams::new(&params, 1.0, 1.0).unwrap();
            let cross = 4.0 * (-1.25f64).exp();
            let golden = golden_oracle(3.0, 1.0, 1.0);
            let newton = newton_oracle(3.0, 1.0, 1.0);
            let eps = 0.75 / pp.m;
            let checks = [
                pp.lambda == 4.0,
                (pp.m - cross).abs() < 1e-6,
                (golden - newton).abs() < 1e-9,
                (golden - cross).abs() < 1e-6,
                (pp.epsilon - eps).abs() <= 1e-15 * eps,
                (pp.a(10) - 25.0 * eps * eps).abs() <= 1e-13 * pp.a(10),
            ];
            (
                checks.iter().all(|c| *c),
                format!(
                    "λ={} M={:.12} (4e^(-5/4)={cross:.12}, golden {golden:.12}, newton {newton:.12}) ε={:.10} A(10)={:.10}",
                    pp.lambda, pp.m, pp.epsilon, pp.a(10)
                ),
            )
        },
        1.0,
    )
}

/// Max error of the p = 2 solver against `e^{−t} sin x` on `(0, π) × (0, 1)`.
pub fn heat_error(cells: usize) -> f64 {
    let params = PParams::new(2.0, 1).unwrap();
    let g = |z: &SpaceTimePoint| (-z.t).exp() * z.x[0].sin();
    let grid = CylinderGrid {
        h: PI / cells as f64,
        levels: 1,
    };
    let sol = solve_cylinder_1d(&params, (0.0, PI), (0.0, 1.0), &g, grid, &SolverOptions::default()).unwrap();
    sol.final_values()
        .into_iter()
        .map(|(c, v)| (v - (-1f64).exp() * sol.mask.center(c)[0].sin()).abs())
        .fold(0.0, f64::max)
}

/// Relative max-norm error of the p = 3 solver against the Barenblatt
/// solution on `(−5, 5) × (1, 1.5)` with `h = 1/400`.
pub fn barenblatt_error() -> f64 {
    let params = PParams::new(3.0, 1).unwrap();
    let g = |z: &SpaceTimePoint| barenblatt(&params, 1.0, z).unwrap();
    let grid = CylinderGrid {
        h: 1.0 / 400.0,
        levels: 1,
    };
    let sol = solve_cylinder_1d(&params, (-5.0, 5.0), (1.0, 1.5), &g, grid, &SolverOptions::default()).unwrap();
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (c, v) in sol.final_values() {
        let exact = g(&SpaceTimePoint::new(sol.mask.center(c), 1.5));
        err = err.max((v - exact).abs());
        scale = scale.max(exact.abs());
    }
    err / scale
}

/// Largest deviation from a linear steady state.
pub fn steady_state_error(p: f64) -> f64 {
    let params = PParams::new(p, 1).unwrap();
    let g = |z: &SpaceTimePoint| 0.3 + 1.7 * z.x[0];
    let grid = CylinderGrid { h: 0.02, levels: 4 };
    let sol = solve_cylinder_1d(&params, (0.0, 1.0), (0.0, 0.05), &g, grid, &SolverOptions::default()).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..sol.mask.levels() {
        for c in sol.mask.active_cells(k) {
            worst = worst.max((sol.values[k][c] - g(&SpaceTimePoint::new(sol.mask.center(c), 0.0))).abs());
        }
    }
    worst
}

pub fn criterion_5() -> Outcome {
    timed(
        || {
            let (e100, e200) = (heat_error(100), heat_error(200));
            let ratio = e100 / e200;
            let bar = barenblatt_error();
            let steady = [steady_state_error(1.5), steady_state_error(3.0)];
            let ok = e200 < 1e-3 && (3.0..=5.0).contains(&ratio) && bar < 0.02 && steady.iter().all(|s| *s <= 1e-12);
            (
                ok,
                format!(
                    "heat err {e200:.2e} at π/200, ratio {ratio:.3}; Barenblatt rel err {bar:.2e}; steady {:.1e}/{:.1e}",
                    steady[0], steady[1]
                ),
            )
        },
        60.0,
    )
}

pub fn scaling_mask() -> SpaceTimeMask {
    let d = make_domain(&DomainSpec::Box {
        lo: vec![0.0],
        hi: vec![1.0],
        t0: 0.0,
        t1: 0.05,
    })
    .unwrap();
    rasterize(&d, 0.02, &uniform_levels(0.0, 0.05, 5)).unwrap()
}

pub fn scaling_discrepancy(p: f64, a: f64) -> f64 {
    let params = PParams::new(p, 1).unwrap();
    let f = |z: &SpaceTimePoint| (3.0 * z.x[0]).sin() + 0.5 * (z.x[0] - 0.4).abs() + z.t;
    check_scaling_identity(&params, a, &scaling_mask(), &f, &SolverOptions::default())
        .unwrap()
        .discrepancy
}

pub fn criterion_6() -> Outcome {
    let d3 = scaling_discrepancy(3.0, 8.0);
    let d15 = scaling_discrepancy(1.5, 2.0);
    Outcome::new(
        d3 <= 1e-10 && d15 <= 1e-10,
        format!("(p=3, a=8) {d3:.2e}; (p=1.5, a=2) {d15:.2e}"),
    )
}

/// Seeded smooth boundary data: a sum of three Gaussian bumps plus a tilt.
pub struct Bumps {
    terms: Vec<(f64, Vec<f64>, f64)>,
    tilt: f64,
}

impl Bumps {
    pub fn random(rng: &mut ChaCha8Rng, center: &[f64], spread: &[f64], amplitude: f64, nonneg: bool) -> Self {
        let terms = (0..3)
            .map(|_| {
                let a = if nonneg {
                    rng.gen_range(0.0..amplitude)
                } else {
                    rng.gen_range(-amplitude..amplitude)
                };
                let c = center
                    .iter()
                    .zip(spread)
                    .map(|(c, s)| c + s * rng.gen_range(-1.0..1.0))
                    .collect();
                let w = rng.gen_range(0.3..1.0);
                (a, c, w)
            })
            .collect();
        let tilt = if nonneg {
            rng.gen_range(0.0..0.1) * amplitude
        } else {
            rng.gen_range(-1.0..1.0) * amplitude
        };
        Bumps { terms, tilt }
    }

    /// Coordinates are scaled by `spread` before the bump is evaluated.
    pub fn eval(&self, z: &SpaceTimePoint, spread: &[f64]) -> f64 {
        let q = z.coords();
        let mut v = self.tilt;
        for (a, c, w) in &self.terms {
            let r2: f64 = q
                .iter()
                .zip(c)
                .zip(spread)
                .map(|((x, c), s)| ((x - c) / s).powi(2))
                .sum();
            v += a * (-r2 / (w * w)).exp();
        }
        v
    }
}

/// Name, parameters, mask, bump centre and bump spread.
pub type ComparisonCase = (&'static str, PParams, SpaceTimeMask, Vec<f64>, Vec<f64>);

pub fn comparison_masks() -> Vec<ComparisonCase> {
    let params = PParams::new(3.0, 1).unwrap();
    let cyl = make_domain(&DomainSpec::Box {
        lo: vec![0.0],
        hi: vec![1.0],
        t0: 0.0,
        t1: 0.05,
    })
    .unwrap();
    let cyl_mask = rasterize(&cyl, 0.02, &uniform_levels(0.0, 0.05, 5)).unwrap();
    let petr = make_domain(&DomainSpec::Petrovskii {
        k: 1.0,
        alpha: 1.0,
        p: 3.0,
        n: 1,
    })
    .unwrap();
    let t0 = -1.0 / (2.0 * E);
    let petr_mask = rasterize(&petr, 0.004, &uniform_levels(t0, 0.0, 20)).unwrap();
    vec![
        ("cylinder", params, cyl_mask, vec![0.5, 0.025], vec![0.5, 0.05]),
        ("petrovskii", params, petr_mask, vec![0.0, t0 / 2.0], vec![0.1, -t0]),
    ]
}

/// Worst slack over `pairs` seeded ordered pairs on each mask.
pub fn comparison_slacks(pairs: usize) -> Vec<(&'static str, f64, usize)> {
    let mut out = Vec::new();
    for (name, params, mask, center, spread) in comparison_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst = f64::INFINITY;
        let mut failed = 0;
        for _ in 0..pairs {
            let base = Bumps::random(&mut rng, &center, &spread, 1.0, false);
            let bump = Bumps::random(&mut rng, &center, &spread, 0.5, true);
            let g1 = |z: &SpaceTimePoint| base.eval(z, &spread);
            let g2 = |z: &SpaceTimePoint| base.eval(z, &spread) + bump.eval(z, &spread);
            let r = check_comparison(&params, &mask, &g1, &g2, 1e-12, &SolverOptions::default()).unwrap();
            worst = worst.min(r.min_slack);
            if !r.holds {
                failed += 1;
            }
        }
        out.push((name, worst, failed));
    }
    out
}

pub fn criterion_7() -> Outcome {
    let rows = comparison_slacks(20);
    let ok = rows.iter().all(|r| r.2 == 0 && r.1 >= -1e-12);
    let detail = rows
        .iter()
        .map(|(n, s, f)| format!("{n}: 20 pairs, min slack {s:.3e}, {f} failed"))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome::new(ok, detail)
}

pub const PROBE_EXPECTATIONS: [(&str, &str, f64, Verdict); 5] = [
    ("cylinder", "lateral", 3.0, Verdict::ConsistentWithRegular),
    ("cylinder", "earliest", 3.0, Verdict::ConsistentWithRegular),
    ("barenblatt_ball", "origin-final", 3.0, Verdict::ConsistentWithIrregular),
    ("petrovskii", "origin-final", 3.0, Verdict::ConsistentWithRegular),
    ("singular_final", "origin-final", 1.5, Verdict::ConsistentWithRegular),
];

pub fn criterion_8() -> Outcome {
    timed(
        || {
            let mut ok = true;
            let mut parts = Vec::new();
            for (domain, point, p, expected) in PROBE_EXPECTATIONS {
                let report = probe_scenario(domain, point, Some(p)).unwrap().run().unwrap();
                ok &= report.verdict == expected;
                parts.push(format!("{domain}/{point} {}", report.verdict.as_str()));
            }
            (ok, parts.join(", "))
        },
        600.0,
    )
}

/// The union `((0,3)×(0,1)) ∪ ((1,2)×(0,2))` in one space dimension.
pub fn xi_union() -> pbl_core::geometry::ParabolicBoundary {
    parabolic_boundary(vec![
        Cylinder::new(vec![0.0], vec![3.0], 0.0, 1.0),
        Cylinder::new(vec![1.0], vec![2.0], 0.0, 2.0),
    ])
}

pub fn criterion_9() -> Outcome {
    let b = xi_union();
    let pt = |x: f64, t: f64| SpaceTimePoint::new(vec![x], t);
    let inside = [pt(1.0, 1.0), pt(2.0, 1.0), pt(1.0, 1.5), pt(0.0, 0.5), pt(1.5, 0.0)];
    let outside = [pt(0.5, 1.0), pt(2.5, 1.0), pt(1.5, 1.0), pt(1.5, 2.0), pt(1.5, 0.5)];
    let ok = inside.iter().all(|z| b.contains(z)) && outside.iter().all(|z| !b.contains(z));
    Outcome::new(
        ok,
        "corners (1,1),(2,1) in the parabolic boundary; (0.5,1),(2.5,1) on the lower slab top are not".to_string(),
    )
}

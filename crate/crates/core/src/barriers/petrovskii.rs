use std::collections::BTreeMap;
use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use super::{first_index, golden_max};
use crate::error::{Error, Result};
use crate::family::{BarrierFamily, FamilyMembers, SolutionKind};
use crate::field::{Derivatives, ScalarField, SpaceTimePoint};
use crate::geometry::{make_domain, DomainGeometry, DomainSpec, SpaceTimeBox};
use crate::params::PParams;

/// Upper end of the `-log(-t)` search interval for `M`.
const LOG_SEARCH_MAX: f64 = 700.0;

/// Constants of the Petrovskiĭ-type barrier family for `p > 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetrovskiiParams {
    pub p: f64,
    pub n: usize,
    pub alpha: f64,
    pub k: f64,
    pub lambda: f64,
    /// `M = sup g` with `g(t) = (-t)^{n/λ} h(t)^α` on `(-1/(2e), 0)`.
    pub m: f64,
    /// Where the supremum is attained (`t = -1/(2e)` when it sits on the edge).
    pub t_star: f64,
    pub m_on_boundary: bool,
    /// `ε = (p/λ)^{1/(p-2)}/M`.
    pub epsilon: f64,
}

/// `log g` as a function of `L = -log(-t)`.
fn log_g(p: f64, n: usize, alpha: f64, lambda: f64, big_l: f64) -> f64 {
    let h = (big_l.powf(p - 2.0) - 1.0) / (p - 2.0);
    -(n as f64) * big_l / lambda + alpha * h.ln()
}

impl PetrovskiiParams {
    pub fn new(params: &PParams, alpha: f64, k: f64) -> Result<Self> {
        params.validate()?;
        let (p, n) = (params.p, params.n);
        if !(p > 2.0) {
            return Err(Error::param(format!("the Petrovskiĭ family needs p > 2, got {p}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::param(format!("α must be > 0, got {alpha}")));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::param(format!("K must be > 0, got {k}")));
        }
        let lambda = params.lambda();
        let lo = 1.0 + LN_2;
        let f = |big_l: f64| log_g(p, n, alpha, lambda, big_l);

        // Coarse scan, then golden refinement around the best sample.
        let m = 20_000;
        let ds = (LOG_SEARCH_MAX - lo) / m as f64;
        let mut best = (0usize, f64::NEG_INFINITY);
        for i in 0..=m {
            let v = f(lo + ds * i as f64);
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::numerical(format!(
                    "g is not finite at L = {}",
                    lo + ds * i as f64
                )));
            }
            if v > best.1 {
                best = (i, v);
            }
        }
        if best.0 == m {
            return Err(Error::numerical("maximization of g did not bracket a maximum"));
        }
        let (big_l, log_m, on_boundary) = if best.0 == 0 && f(lo + 1e-9) <= f(lo) {
            (lo, f(lo), true)
        } else {
            let a = lo + ds * best.0.saturating_sub(1) as f64;
            let b = lo + ds * (best.0 + 1) as f64;
            let (x, fx) = golden_max(f, a, b, 1e-14);
            (x, fx, false)
        };
        let mm = log_m.exp();
        if !(mm.is_finite() && mm > 0.0) {
            return Err(Error::numerical(format!("M = {mm} is not finite and positive")));
        }
        let epsilon = (p / lambda).powf(1.0 / (p - 2.0)) / mm;
        Ok(PetrovskiiParams {
            p,
            n,
            alpha,
            k,
            lambda,
            m: mm,
            t_star: -(-big_l).exp(),
            m_on_boundary: on_boundary,
            epsilon,
        })
    }

    fn q(&self) -> f64 {
        (self.p - 1.0) / (self.p - 2.0)
    }

    /// `c = (p-2)/(pλ^{1/(p-1)})`.
    pub fn c(&self) -> f64 {
        (self.p - 2.0) / (self.p * self.lambda.powf(1.0 / (self.p - 1.0)))
    }

    pub fn a(&self, j: u64) -> f64 {
        let (p, n) = (self.p, self.n as f64);
        n * (p - 2.0) * self.epsilon.powf(p - 1.0) * (j as f64).powf(self.q()) / (n * (p - 2.0).powi(2) + p)
    }

    /// `L` of the inequality chain with `j ≥ 1`.
    pub fn l_const(&self) -> f64 {
        let p = self.p;
        (p - 1.0) / (p * self.lambda.powf(1.0 / (p - 1.0)))
            * (1.0 + self.c() * self.k * self.m.powf(p - 2.0)).powf(1.0 / (p - 2.0))
    }

    /// `np(p-2)/([n(p-2)²+p]λM^{p-2})`.
    pub fn r_const(&self) -> f64 {
        let (p, n) = (self.p, self.n as f64);
        n * p * (p - 2.0) / ((n * (p - 2.0).powi(2) + p) * self.lambda * self.m.powf(p - 2.0))
    }

    /// Smallest `j` with `L·K/j < R`.
    pub fn j_min(&self) -> u64 {
        (self.l_const() * self.k / self.r_const()).floor() as u64 + 1
    }

    /// `B = ((1+σ)^{(p-1)/(p-2)} - 1)/σ` with `σ = cKM^{p-2}`, the secant slope
    /// bounding `(1+s)^{(p-1)/(p-2)} ≤ 1 + Bs` on `[0, σ]`.
    pub fn b_const(&self) -> f64 {
        let sigma = self.c() * self.k * self.m.powf(self.p - 2.0);
        ((1.0 + sigma).powf(self.q()) - 1.0) / sigma
    }

    /// Lower bound `w_j ≥ κ(j)·d` on the domain.
    pub fn kappa(&self, j: u64) -> f64 {
        let (p, n) = (self.p, self.n as f64);
        let jf = j as f64;
        self.epsilon
            * jf.powf(self.q())
            * (n * (p - 2.0) * self.epsilon.powf(p - 2.0) / (n * (p - 2.0).powi(2) + p)
                - self.b_const() * self.c() * self.k / jf)
    }

    fn h(&self, t: f64) -> f64 {
        ((-(-t).ln()).powf(self.p - 2.0) - 1.0) / (self.p - 2.0)
    }

    pub fn f(&self, t: f64) -> f64 {
        -self.epsilon * self.h(t).powf(self.alpha)
    }

    pub fn rho(&self, j: u64, t: f64) -> f64 {
        let p = self.p;
        self.a(j) * (-t).powf(1.0 - p / self.lambda) * self.h(t).powf(self.alpha * (p - 1.0))
    }

    fn big_f(&self, j: u64, z: &SpaceTimePoint) -> f64 {
        let p = self.p;
        let tau = -z.t;
        j as f64 + self.c() * (z.x_norm() / tau.powf(1.0 / self.lambda)).powf(p / (p - 1.0))
    }

    /// The positivity condition `F^{(p-1)/(p-2)} < j^{(p-1)/(p-2)} - ρ/f`.
    pub fn in_positivity_region(&self, j: u64, z: &SpaceTimePoint) -> bool {
        let q = self.q();
        self.big_f(j, z).powf(q) < (j as f64).powf(q) - self.rho(j, z.t) / self.f(z.t)
    }

    fn gauge(&self, t: f64) -> f64 {
        let p = self.p;
        (-t).powf(self.n as f64 * (p - 2.0) / self.lambda) * self.h(t).powf(self.alpha * (p - 1.0))
    }
}

struct Petrovskii {
    pp: PetrovskiiParams,
}

impl FamilyMembers for Petrovskii {
    fn name(&self) -> &str {
        "petrovskii"
    }

    fn member(&self, j: u64) -> Result<ScalarField> {
        let pp = self.pp.clone();
        let (p, n, lam, al, eps) = (pp.p, pp.n, pp.lambda, pp.alpha, pp.epsilon);
        let q = pp.q();
        let beta = 1.0 / (p - 2.0);
        let jq = (j as f64).powf(q);
        let a = pp.a(j);
        let jf = j as f64;
        let nf = n as f64;

        // h, f, f', ρ, ρ' in terms of τ = -t and Λ = -log τ.
        let time = move |t: f64| {
            let tau = -t;
            let big_l = -tau.ln();
            let h = (big_l.powf(p - 2.0) - 1.0) / (p - 2.0);
            let f = -eps * h.powf(al);
            let fp = -al * eps * h.powf(al - 1.0) * big_l.powf(p - 3.0) / tau;
            let e = al * (p - 1.0);
            let rho = a * tau.powf(nf * (p - 2.0) / lam) * h.powf(e);
            let rhop = -a * (nf * (p - 2.0) / lam) * tau.powf(-p / lam) * h.powf(e)
                + a * e * tau.powf(1.0 - p / lam) * h.powf(e - 1.0) * big_l.powf(p - 3.0) / tau;
            (tau, f, fp, rho, rhop)
        };
        let pv = pp.clone();
        let value = move |z: &SpaceTimePoint| {
            let (_, f, _, rho, _) = time(z.t);
            let ff = pv.big_f(j, z);
            f * ff.powf(q) - jq * f + rho
        };
        let pd = pp.clone();
        let pg = pp.clone();
        let pl = pp;
        let derivs = Derivatives::new()
            .with_dt(move |z| {
                let (tau, f, fp, _, rhop) = time(z.t);
                let ff = pd.big_f(j, z);
                fp * ff.powf(q) + p * f * ff.powf(beta) * (ff - jf) / ((p - 2.0) * lam * tau) - jq * fp + rhop
            })
            .with_grad(move |z| {
                let (tau, f, _, _, _) = time(z.t);
                let ff = pg.big_f(j, z);
                let r = z.x_norm();
                if r == 0.0 {
                    return vec![0.0; n];
                }
                let s = f * ff.powf(beta) * lam.powf(-1.0 / (p - 1.0)) * r.powf((2.0 - p) / (p - 1.0))
                    / tau.powf(p / (lam * (p - 1.0)));
                z.x.iter().map(|xi| s * xi).collect()
            })
            .with_p_laplacian(move |z| {
                let (tau, f, _, _, _) = time(z.t);
                let ff = pl.big_f(j, z);
                f.abs().powf(p - 2.0) * f * tau.powf(-p / lam) / lam
                    * (nf * ff.powf(q) + p * ff.powf(beta) * (ff - jf) / (p - 2.0))
            });
        Ok(ScalarField::new(n, value).with_derivatives(derivs))
    }

    fn gauge(&self, z: &SpaceTimePoint) -> f64 {
        self.pp.gauge(z.t)
    }

    fn index_for_gauge(&self, k: f64) -> Result<u64> {
        first_index(self.pp.j_min(), |j| self.pp.kappa(j) >= k)
    }

    fn constants(&self, j: Option<u64>) -> BTreeMap<String, f64> {
        let pp = &self.pp;
        let mut c = BTreeMap::from([
            ("lambda".to_string(), pp.lambda),
            ("M".to_string(), pp.m),
            ("t_star".to_string(), pp.t_star),
            ("epsilon".to_string(), pp.epsilon),
            ("L".to_string(), pp.l_const()),
            ("R".to_string(), pp.r_const()),
            ("B".to_string(), pp.b_const()),
            ("K".to_string(), pp.k),
            ("alpha".to_string(), pp.alpha),
        ]);
        if let Some(j) = j {
            c.insert("A".into(), pp.a(j));
            c.insert("kappa".into(), pp.kappa(j));
        }
        c
    }

    /// `ρ_j` decays only like a small power of `-t` times logarithms.
    fn limit_radii(&self) -> Vec<f64> {
        vec![2f64.powi(-8), 2f64.powi(-40), 2f64.powi(-100)]
    }
}

/// Barriers at the origin of `{-1/(2e) < t < 0, (|x|/(-t)^{1/λ})^{p/(p-1)} < K(-t)^{n(p-2)/λ}h^{α(p-2)}}`.
pub fn make_petrovskii_family(pp: &PetrovskiiParams) -> Result<BarrierFamily> {
    let domain = make_domain(&DomainSpec::Petrovskii {
        k: pp.k,
        alpha: pp.alpha,
        p: pp.p,
        n: pp.n,
    })?;
    Ok(BarrierFamily::new(
        Petrovskii { pp: pp.clone() },
        pp.j_min(),
        domain,
        SpaceTimePoint::origin(pp.n),
        SolutionKind::Supersolution,
    ))
}

/// The single barrier of the singular supercritical range, with its domain.
/// It tends to zero as `j → ∞`, so no barrier family arises from it.
#[derive(Debug, Clone)]
pub struct SingleBarrier {
    pub field: ScalarField,
    pub domain: DomainGeometry,
    /// `sup (-t)^{n/λ} h̃(t)^α` over `(-1/(2e), 0)`.
    pub m: f64,
}

/// `w` for `2n/(n+1) < p < 2` on
/// `{-1/(2e) < t < 0, (|x|/(-t)^{1/λ})^{p/(p-1)} < K(-t)^{n(2-p)/λ}h̃^{α(2-p)}}`,
/// with `h̃ = (|log(-t)|^{2-p} - 1)/(2-p)`. Only finite differences are
/// attached.
pub fn supercritical_single_barrier(
    params: &PParams,
    alpha: f64,
    k: f64,
    epsilon: f64,
    j: u64,
) -> Result<SingleBarrier> {
    params.validate()?;
    let (p, n) = (params.p, params.n);
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::param(format!("the single barrier needs 1 < p < 2, got {p}")));
    }
    params.require_lambda_positive("single barrier")?;
    for (name, v) in [("α", alpha), ("K", k), ("ε", epsilon)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(format!("{name} must be > 0, got {v}")));
        }
    }
    if j == 0 {
        return Err(Error::param("j must be ≥ 1"));
    }
    let lam = params.lambda();
    let nf = n as f64;
    let ht = move |t: f64| (((-t).ln().abs()).powf(2.0 - p) - 1.0) / (2.0 - p);
    let lo = 1.0 + LN_2;
    let lg = |big_l: f64| -nf * big_l / lam + alpha * ((big_l.powf(2.0 - p) - 1.0) / (2.0 - p)).ln();
    let (_, log_m) = golden_max(lg, lo, LOG_SEARCH_MAX, 1e-14);
    let m = log_m.exp().max(lg(lo).exp());
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::numerical(format!("M = {m} is not finite and positive")));
    }

    let t_min = -1.0 / (2.0 * E);
    let cc = (2.0 - p) / (p * lam.powf(1.0 / (p - 1.0)));
    let e = (p - 1.0) / (2.0 - p);
    let jf = j as f64;
    let value = move |z: &SpaceTimePoint| {
        let tau = -z.t;
        let h = ht(z.t);
        let x = (z.x_norm() / tau.powf(1.0 / lam)).powf(p / (p - 1.0));
        -epsilon * h.powf(alpha) * (jf - cc * x).powf(-e)
            + epsilon * jf.powf(-e) * h.powf(alpha)
            + nf * (2.0 - p) * epsilon * jf.powf(-e) / (lam * m.powf(2.0 - p))
                * tau.powf(nf * (2.0 - p) / lam)
                * h.powf(alpha * (3.0 - p))
    };
    let radius = move |t: f64| {
        let tau = -t;
        let rhs = k * tau.powf(nf * (2.0 - p) / lam) * ht(t).powf(alpha * (2.0 - p));
        tau.powf(1.0 / lam) * rhs.powf((p - 1.0) / p)
    };
    let (_, ymax) = golden_max(|s: f64| radius(-(-s).exp()), 1.0 + LN_2, LOG_SEARCH_MAX, 1e-12);
    let ymax = (0..=2000)
        .map(|i| radius(-(-(lo + i as f64 * (LOG_SEARCH_MAX - lo) / 2000.0)).exp()))
        .fold(ymax, f64::max)
        * 1.01;
    let bbox = SpaceTimeBox::new(vec![-ymax; n], vec![ymax; n], t_min, 0.0)?;
    let domain = DomainGeometry::from_predicate(bbox, "singular supercritical", move |z| {
        z.t > t_min && z.t < 0.0 && z.x_norm() < radius(z.t)
    });
    let field = ScalarField::new(n, value)
        .with_domain(domain.clone())
        .with_label(format!("single barrier j={j}"));
    Ok(SingleBarrier { field, domain, m })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> PetrovskiiParams {
        PetrovskiiParams::new(&PParams::new(3.0, 1).unwrap(), 1.0, 1.0).unwrap()
    }

    #[test]
    fn m_and_epsilon_for_p3() {
        let pp = p3();
        let m = 4.0 * (-1.25f64).exp();
        assert!((pp.m - m).abs() < 1e-12, "{} vs {m}", pp.m);
        assert!((pp.t_star + (-5f64).exp()).abs() < 1e-8);
        assert!(!pp.m_on_boundary);
        assert!((pp.epsilon - 0.75 / m).abs() < 1e-12);
        assert!(((pp.epsilon * pp.m).powf(pp.p - 2.0) - pp.p / pp.lambda).abs() < 1e-12);
    }

    #[test]
    fn a_and_j_min_for_p3() {
        let pp = p3();
        assert!((pp.a(10) - 25.0 * pp.epsilon.powi(2)).abs() < 1e-12);
        assert_eq!(pp.j_min(), 3);
    }

    #[test]
    fn rejects_p_at_most_two() {
        assert!(PetrovskiiParams::new(&PParams::new(2.0, 1).unwrap(), 1.0, 1.0).is_err());
        assert!(PetrovskiiParams::new(&PParams::new(1.5, 1).unwrap(), 1.0, 1.0).is_err());
        assert!(PetrovskiiParams::new(&PParams::new(3.0, 1).unwrap(), 0.0, 1.0).is_err());
    }

    #[test]
    fn below_rho_and_positive() {
        let pp = p3();
        let fam = make_petrovskii_family(&pp).unwrap();
        let w = fam.member(fam.j_min).unwrap();
        for &(x, t) in &[(0.0, -0.01), (0.05, -0.1), (0.001, -1e-6)] {
            let z = SpaceTimePoint::new(vec![x], t);
            assert!(fam.domain.contains(&z));
            let v = w.value(&z);
            assert!(v > 0.0 && v <= pp.rho(fam.j_min, t) * (1.0 + 1e-12), "{v} at {z:?}");
            assert!(pp.in_positivity_region(fam.j_min, &z));
        }
    }

    #[test]
    fn single_barrier_shrinks_with_j() {
        let params = PParams::new(1.8, 1).unwrap();
        let z = SpaceTimePoint::new(vec![0.0], -0.05);
        let w1 = supercritical_single_barrier(&params, 1.0, 1.0, 1.0, 1).unwrap();
        let w2 = supercritical_single_barrier(&params, 1.0, 1.0, 1.0, 1000).unwrap();
        assert!(w1.domain.contains(&z));
        assert!(w2.field.value(&z).abs() < w1.field.value(&z).abs());
        assert!(supercritical_single_barrier(&PParams::new(3.0, 1).unwrap(), 1.0, 1.0, 1.0, 1).is_err());
    }
}

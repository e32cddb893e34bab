use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::first_index;
use super::paste::{paste_min, PasteOptions, Region};
use crate::error::{Error, Result};
use crate::family::{BarrierFamily, FamilyMembers, SolutionKind};
use crate::field::{norm, Derivatives, ScalarField, SpaceTimePoint};
use crate::geometry::{make_domain, DomainGeometry, DomainSpec, SpaceTimeBox};
use crate::params::PParams;

/// A north-pole boundary point with the domain locally `{t > -θ|x|^l}`, and
/// the exponent `k` of the shrinking pasting regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NorthPoleParams {
    pub p: f64,
    pub n: usize,
    pub theta: f64,
    pub l: f64,
    pub k: f64,
}

impl NorthPoleParams {
    pub fn new(params: &PParams, theta: f64, l: f64, k: f64) -> Result<Self> {
        params.validate()?;
        let p = params.p;
        let q = p / (p - 1.0);
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::param(format!("θ must be > 0, got {theta}")));
        }
        if !(k > q) {
            return Err(Error::param(format!("k = {k} must exceed p/(p-1) = {q}")));
        }
        if p < 2.0 && !(l >= q) {
            return Err(Error::param(format!("l = {l} must be ≥ p/(p-1) = {q} for p < 2")));
        }
        if p >= 2.0 && !(l > p && l > q + k * (p - 2.0)) {
            return Err(Error::param(format!(
                "l = {l} must exceed p = {p} and p/(p-1) + k(p-2) = {}",
                q + k * (p - 2.0)
            )));
        }
        let np = NorthPoleParams {
            p,
            n: params.n,
            theta,
            l,
            k,
        };
        let (a, b) = np.m_exponents();
        if !(a > 0.0 && a > b) {
            return Err(Error::param(format!(
                "m_j does not grow: exponents {a} and {b} need {a} > 0 and {a} > {b}"
            )));
        }
        Ok(np)
    }

    /// Exponents `1 - p/((p-1)k)` and `p - 1 - l/k` of the two terms of `m_j`.
    pub fn m_exponents(&self) -> (f64, f64) {
        let p = self.p;
        (1.0 - p / ((p - 1.0) * self.k), p - 1.0 - self.l / self.k)
    }

    pub fn m(&self, j: u64) -> f64 {
        let jf = j as f64;
        let (a, b) = self.m_exponents();
        let p = self.p;
        jf.powf(a) * (p - 1.0) / p - self.n as f64 * self.theta * jf.powf(b)
    }

    /// Spatial radius `j^{-1/k}` and depth `θj^{-l/k}` of `G^j`.
    pub fn region(&self, j: u64) -> (f64, f64) {
        let jf = j as f64;
        (jf.powf(-1.0 / self.k), self.theta * jf.powf(-self.l / self.k))
    }

    /// The smooth solution `f_j = j((p-1)/p)|x|^{p/(p-1)} + n j^{p-1} t`.
    pub fn f(&self, j: u64) -> ScalarField {
        let (p, n) = (self.p, self.n);
        let jf = j as f64;
        let c = (p - 1.0) / p;
        let q = p / (p - 1.0);
        let s = n as f64 * jf.powf(p - 1.0);
        let value = move |z: &SpaceTimePoint| jf * c * z.x_norm().powf(q) + s * z.t;
        let derivs = Derivatives::new()
            .with_dt(move |_| s)
            .with_grad(move |z| {
                let r = z.x_norm();
                if r == 0.0 {
                    return vec![0.0; n];
                }
                let g = jf * r.powf((2.0 - p) / (p - 1.0));
                z.x.iter().map(|xi| g * xi).collect()
            })
            .with_p_laplacian(move |_| s);
        ScalarField::new(n, value).with_derivatives(derivs)
    }

    fn smallness(&self, j: u64) -> f64 {
        let p = self.p;
        let q = p / (p - 1.0);
        self.n as f64 * self.theta * q * (j as f64).powf(p - 2.0 - (self.l - q) / self.k)
    }
}

struct NorthPole {
    np: NorthPoleParams,
    domain: DomainGeometry,
}

impl FamilyMembers for NorthPole {
    fn name(&self) -> &str {
        "north_pole"
    }

    fn member(&self, j: u64) -> Result<ScalarField> {
        let np = &self.np;
        let m = np.m(j);
        let outer = ScalarField::constant(np.n, m).with_derivatives(
            Derivatives::new()
                .with_dt(|_| 0.0)
                .with_grad({
                    let n = np.n;
                    move |_| vec![0.0; n]
                })
                .with_p_laplacian(|_| 0.0),
        );
        let (r, depth) = np.region(j);
        let region: Region = Arc::new(move |z| z.x_norm() < r && z.t > -depth && z.t < 0.0);
        let bbox = SpaceTimeBox::new(vec![-r; np.n], vec![r; np.n], -depth, 0.0)?;
        let opts = PasteOptions {
            collar: Some(1e-6 * r.min(depth)),
            ..PasteOptions::default()
        };
        paste_min(&outer, &np.f(j), region, &bbox, &self.domain, &opts)
    }

    fn gauge(&self, z: &SpaceTimePoint) -> f64 {
        let p = self.np.p;
        ((p - 1.0) / p * z.x_norm().powf(p / (p - 1.0))).min(1.0)
    }

    fn index_for_gauge(&self, k: f64) -> Result<u64> {
        first_index(1, |j| j as f64 / 2.0 >= k && self.np.m(j) >= k)
    }

    fn constants(&self, j: Option<u64>) -> BTreeMap<String, f64> {
        let (a, b) = self.np.m_exponents();
        let mut c = BTreeMap::from([
            ("theta".to_string(), self.np.theta),
            ("l".to_string(), self.np.l),
            ("k".to_string(), self.np.k),
            ("m_exponent_lead".to_string(), a),
            ("m_exponent_tail".to_string(), b),
        ]);
        if let Some(j) = j {
            let (r, depth) = self.np.region(j);
            c.insert("m_j".into(), self.np.m(j));
            c.insert("region_radius".into(), r);
            c.insert("region_depth".into(), depth);
        }
        c
    }

    /// Points near the pole lie in a sliver `-θ|x|^l < t < 0`; draw `x` first
    /// and then `t` from the admissible interval.
    fn sample_near(
        &self,
        domain: &DomainGeometry,
        center: &SpaceTimePoint,
        r: f64,
        rng: &mut ChaCha8Rng,
    ) -> Option<SpaceTimePoint> {
        let n = self.np.n;
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..n).map(|i| center.x[i] + r * rng.gen_range(-1.0..1.0)).collect();
            let rx = norm(&x);
            if rx == 0.0 || rx >= r {
                continue;
            }
            let lo = (-self.np.theta * rx.powf(self.np.l)).max(-(r * r - rx * rx).sqrt());
            let t = center.t + lo * rng.gen_range(0.0..1.0);
            let z = SpaceTimePoint::new(x, t);
            if z.distance(center) < r && domain.contains(&z) {
                return Some(z);
            }
        }
        None
    }
}

/// Barriers at the north pole `ξ₀ = 0` of `{|x| < 1, -1 < t < 0, t > -θ|x|^l}`.
pub fn make_north_pole_family(params: &PParams, theta: f64, l: f64, k: f64) -> Result<BarrierFamily> {
    let np = NorthPoleParams::new(params, theta, l, k)?;
    let domain = make_domain(&DomainSpec::NorthPole { theta, l, n: params.n })?;
    let j_min = first_index(1, |j| np.m(j) > 0.0 && np.smallness(j) <= 0.5)?;
    let members = NorthPole {
        np,
        domain: domain.clone(),
    };
    Ok(BarrierFamily::new(
        members,
        j_min,
        domain,
        SpaceTimePoint::origin(params.n),
        SolutionKind::Supersolution,
    ))
}

use std::collections::BTreeMap;

use super::first_index;
use crate::error::{Error, Result};
use crate::family::{BarrierFamily, FamilyMembers, SolutionKind};
use crate::field::{Derivatives, ScalarField, SpaceTimePoint};
use crate::geometry::{make_domain, DomainSpec};
use crate::params::PParams;

/// `ψ_j = j((p-1)/p)|x-x₀|^{p/(p-1)} + j^{p-1}(n/(2 diam))(t-t₀)²`, a family of
/// subsolutions vanishing at `ξ₀`.
struct Psi {
    p: f64,
    n: usize,
    diam: f64,
    base: SpaceTimePoint,
}

impl Psi {
    fn offset(&self, z: &SpaceTimePoint) -> (Vec<f64>, f64) {
        let y: Vec<f64> = z.x.iter().zip(&self.base.x).map(|(a, b)| a - b).collect();
        (y, z.t - self.base.t)
    }
}

/// Closed-form `∂ₜψ_j - Δ_pψ_j = j^{p-1} n (t-t₀)/diam - j^{p-1} n`.
pub fn psi_residual(params: &PParams, diam: f64, base: &SpaceTimePoint, j: u64, z: &SpaceTimePoint) -> f64 {
    let jp = (j as f64).powf(params.p - 1.0);
    let n = params.n as f64;
    jp * n * (z.t - base.t) / diam - jp * n
}

impl FamilyMembers for Psi {
    fn name(&self) -> &str {
        "psi"
    }

    fn member(&self, j: u64) -> Result<ScalarField> {
        let (p, n, diam) = (self.p, self.n as f64, self.diam);
        let jf = j as f64;
        let jp = jf.powf(p - 1.0);
        let c = (p - 1.0) / p;
        let q = p / (p - 1.0);
        let base = self.base.clone();
        let (b1, b2) = (base.clone(), base.clone());
        let value = move |z: &SpaceTimePoint| {
            let r =
                z.x.iter()
                    .zip(&base.x)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
            jf * c * r.powf(q) + jp * n / (2.0 * diam) * (z.t - base.t).powi(2)
        };
        let derivs = Derivatives::new()
            .with_dt(move |z| jp * n / diam * (z.t - b1.t))
            .with_grad(move |z| {
                let y: Vec<f64> = z.x.iter().zip(&b2.x).map(|(a, b)| a - b).collect();
                let r = crate::field::norm(&y);
                if r == 0.0 {
                    return vec![0.0; y.len()];
                }
                let s = jf * r.powf(q - 2.0);
                y.iter().map(|yi| s * yi).collect()
            })
            .with_p_laplacian(move |_| n * jp);
        Ok(ScalarField::new(self.n, value).with_derivatives(derivs))
    }

    fn gauge(&self, z: &SpaceTimePoint) -> f64 {
        let (y, s) = self.offset(z);
        let r = crate::field::norm(&y);
        let p = self.p;
        (p - 1.0) / p * r.powf(p / (p - 1.0)) + self.n as f64 * s * s / (2.0 * self.diam)
    }

    fn index_for_gauge(&self, k: f64) -> Result<u64> {
        let p = self.p;
        first_index(1, |j| {
            let jf = j as f64;
            jf.min(jf.powf(p - 1.0)) >= k
        })
    }

    fn constants(&self, _j: Option<u64>) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("diam".to_string(), self.diam),
            ("p".to_string(), self.p),
            ("n".to_string(), self.n as f64),
        ])
    }
}

/// The ψ family on the ball of diameter `diam_theta` whose lowest point is `ξ₀`.
pub fn make_psi_family(params: &PParams, diam_theta: f64, base: &SpaceTimePoint) -> Result<BarrierFamily> {
    params.validate()?;
    if !(diam_theta.is_finite() && diam_theta > 0.0) {
        return Err(Error::param(format!("diam must be > 0, got {diam_theta}")));
    }
    if base.dim() != params.n {
        return Err(Error::param("base point dimension differs from n"));
    }
    let mut center = base.coords();
    *center.last_mut().unwrap() += 0.5 * diam_theta;
    let domain = make_domain(&DomainSpec::Ball {
        center,
        radius: 0.5 * diam_theta,
    })?;
    let members = Psi {
        p: params.p,
        n: params.n,
        diam: diam_theta,
        base: base.clone(),
    };
    Ok(BarrierFamily::new(
        members,
        1,
        domain,
        base.clone(),
        SolutionKind::Subsolution,
    ))
}

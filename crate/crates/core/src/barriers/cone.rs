use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::family::{BarrierFamily, FamilyMembers, SolutionKind};
use crate::field::{Derivatives, ScalarField, SpaceTimePoint};
use crate::geometry::{make_domain, ConeOrientation, DomainSpec};
use crate::params::PParams;

/// `μ₀ = e^{1+γ}/(γ^p (p-1))^{1/(p-2)}`, the least height for `p > 2`.
pub fn cone_mu0(p: f64, gamma: f64) -> f64 {
    (1.0 + gamma).exp() / (gamma.powf(p) * (p - 1.0)).powf(1.0 / (p - 2.0))
}

/// Rate `α(j) = (j^{2-p}/(γ^p (p-1)))^{1/(p-1)}` used for `1 < p < 2`.
pub fn cone_alpha(p: f64, gamma: f64, j: u64) -> f64 {
    ((j as f64).powf(2.0 - p) / (gamma.powf(p) * (p - 1.0))).powf(1.0 / (p - 1.0))
}

struct Cone {
    p: f64,
    gamma: f64,
}

impl Cone {
    fn rate(&self, j: u64) -> f64 {
        if self.p > 2.0 {
            1.0
        } else {
            cone_alpha(self.p, self.gamma, j)
        }
    }
}

impl FamilyMembers for Cone {
    fn name(&self) -> &str {
        "cone1d"
    }

    /// `u = μ(1 - e^{-α s})` with `s = |t| - γx`.
    fn member(&self, j: u64) -> Result<ScalarField> {
        let (p, g) = (self.p, self.gamma);
        let mu = j as f64;
        let al = self.rate(j);
        let s = move |z: &SpaceTimePoint| z.t.abs() - g * z.x[0];
        let derivs = Derivatives::new()
            .with_dt(move |z| z.t.signum() * mu * al * (-al * s(z)).exp())
            .with_grad(move |z| vec![-g * mu * al * (-al * s(z)).exp()])
            .with_hessian(move |z| vec![-mu * al * al * g * g * (-al * s(z)).exp()])
            .with_p_laplacian(move |z| {
                -(p - 1.0) * g.powf(p) * mu.powf(p - 1.0) * al.powf(p) * (-(p - 1.0) * al * s(z)).exp()
            });
        Ok(ScalarField::new(1, move |z| -mu * (-al * s(z)).exp_m1()).with_derivatives(derivs))
    }

    fn gauge(&self, z: &SpaceTimePoint) -> f64 {
        -(-(z.t.abs() - self.gamma * z.x[0])).exp_m1()
    }

    fn index_for_gauge(&self, k: f64) -> Result<u64> {
        Ok(k.ceil() as u64)
    }

    fn constants(&self, j: Option<u64>) -> BTreeMap<String, f64> {
        let mut c = BTreeMap::from([("gamma".to_string(), self.gamma)]);
        if self.p > 2.0 {
            c.insert("mu0".into(), cone_mu0(self.p, self.gamma));
        }
        if let Some(j) = j {
            c.insert("alpha".into(), self.rate(j));
            c.insert("mu".into(), j as f64);
        }
        c
    }
}

/// Barriers at the vertex of the horizontal cone `{|t| < γx}` removed from
/// the unit ball in `1+1` dimensions.
pub fn make_cone1d_family(params: &PParams, gamma: f64) -> Result<BarrierFamily> {
    params.validate()?;
    params.require_p_ne_2("cone barrier")?;
    if params.n != 1 {
        return Err(Error::param("the cone barrier is defined for n = 1 only"));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::param(format!("γ must be > 0, got {gamma}")));
    }
    let p = params.p;
    let j_min = if p > 2.0 {
        cone_mu0(p, gamma).ceil()
    } else {
        (gamma.powf(p) * (p - 1.0)).powf(1.0 / (2.0 - p)).ceil().max(1.0)
    } as u64;
    let domain = make_domain(&DomainSpec::Cone1d {
        gamma,
        orientation: ConeOrientation::Horizontal,
    })?;
    Ok(BarrierFamily::new(
        Cone { p, gamma },
        j_min,
        domain,
        SpaceTimePoint::origin(1),
        SolutionKind::Supersolution,
    ))
}

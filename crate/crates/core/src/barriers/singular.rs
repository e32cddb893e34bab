use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::first_index;
use super::paste::{paste_min, PasteOptions, Region};
use crate::error::{Error, Result};
use crate::family::{BarrierFamily, FamilyMembers, SolutionKind};
use crate::field::{Derivatives, ScalarField, SpaceTimePoint};
use crate::geometry::{make_domain, DomainGeometry, DomainSpec, SpaceTimeBox};
use crate::params::PParams;

/// Parameters of the final-point family for `1 < p < 2` on `{|x|^l < K(-t)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularFinalParams {
    pub p: f64,
    pub n: usize,
    pub l: f64,
    pub k: f64,
    pub alpha: f64,
    /// Open interval of admissible `α`.
    pub alpha_window: (f64, f64),
}

impl SingularFinalParams {
    /// `alpha` defaults to the midpoint of the admissible window.
    pub fn new(params: &PParams, l: f64, k: f64, alpha: Option<f64>) -> Result<Self> {
        params.validate()?;
        let p = params.p;
        if !(p > 1.0 && p < 2.0) {
            return Err(Error::param(format!(
                "the singular final family needs 1 < p < 2, got {p}"
            )));
        }
        if !(l > 0.0 && l < p) {
            return Err(Error::param(format!(
                "l = {l} must lie in (0, p): the α window is empty"
            )));
        }
        if !(k.is_finite() && k > 1.0) {
            return Err(Error::param(format!("K must be > 1, got {k}")));
        }
        let window = (1.0 + (1.0 + 0.5 * l) / (2.0 - p), 2.0 / (2.0 - p) + 0.5);
        let alpha = alpha.unwrap_or(0.5 * (window.0 + window.1));
        if !(alpha > window.0 && alpha < window.1) {
            return Err(Error::param(format!(
                "α = {alpha} lies outside the admissible window ({}, {})",
                window.0, window.1
            )));
        }
        Ok(SingularFinalParams {
            p,
            n: params.n,
            l,
            k,
            alpha,
            alpha_window: window,
        })
    }

    /// Exponent of `j` in `m_j`.
    pub fn m_exponent(&self) -> f64 {
        self.alpha - 1.0 - (1.0 + 0.5 * self.l) / (2.0 - self.p)
    }

    pub fn m(&self, j: u64) -> f64 {
        let p = self.p;
        0.75 * (2.0 - p)
            * ((0.5 * (2.0 - p).sqrt()).powf(self.l) / self.k).powf(1.0 / (2.0 - p))
            * (j as f64).powf(self.m_exponent())
    }

    /// Radius `½√((2-p)/j)` of `G^j`.
    pub fn region_radius(&self, j: u64) -> f64 {
        0.5 * ((2.0 - self.p) / j as f64).sqrt()
    }

    /// `C_n = 2(n+p-2)(2-p)^{(p-2)/2}` in the residual bound
    /// `∂ₜu - Δ_p u ≥ (-t/j)^{(p-1)/(2-p)}(C_n j^{α(p-1)+(2-p)/2} - j^{α-2})` on `G^j`.
    pub fn residual_constant(&self) -> f64 {
        let p = self.p;
        2.0 * (self.n as f64 + p - 2.0) * (2.0 - p).powf((p - 2.0) / 2.0)
    }

    pub fn j_min(&self) -> u64 {
        let p = self.p;
        let gap = self.alpha * (p - 1.0) + (2.0 - p) / 2.0 - (self.alpha - 2.0);
        ((1.0 / self.residual_constant()).powf(1.0 / gap).ceil() as u64).max(2)
    }

    /// `u_j = j^α(-t/j)^{1/(2-p)}((2-p)/j - |x|²)`.
    pub fn u(&self, j: u64) -> ScalarField {
        let (p, n, al) = (self.p, self.n, self.alpha);
        let jf = j as f64;
        let ja = jf.powf(al);
        let e = 1.0 / (2.0 - p);
        let value = move |z: &SpaceTimePoint| {
            let r2: f64 = z.x.iter().map(|v| v * v).sum();
            ja * (-z.t / jf).powf(e) * ((2.0 - p) / jf - r2)
        };
        let derivs = Derivatives::new()
            .with_dt(move |z| {
                let r2: f64 = z.x.iter().map(|v| v * v).sum();
                -jf.powf(al - 1.0) / (2.0 - p) * (-z.t / jf).powf((p - 1.0) / (2.0 - p)) * ((2.0 - p) / jf - r2)
            })
            .with_grad(move |z| {
                let s = -2.0 * ja * (-z.t / jf).powf(e);
                z.x.iter().map(|v| s * v).collect()
            })
            .with_hessian(move |z| {
                let s = -2.0 * ja * (-z.t / jf).powf(e);
                let mut h = vec![0.0; n * n];
                for i in 0..n {
                    h[i * n + i] = s;
                }
                h
            })
            .with_p_laplacian(move |z| {
                -2f64.powf(p - 1.0)
                    * jf.powf(al * (p - 1.0))
                    * (-z.t / jf).powf((p - 1.0) / (2.0 - p))
                    * (n as f64 + p - 2.0)
                    * z.x_norm().powf(p - 2.0)
            });
        ScalarField::new(n, value).with_derivatives(derivs)
    }

    fn gauge_index_ok(&self, j: u64, k: f64) -> bool {
        let p = self.p;
        let lead = 0.75 * (2.0 - p) * (j as f64).powf(self.alpha - 1.0 - 1.0 / (2.0 - p));
        lead >= k && self.m(j) >= k
    }
}

struct SingularFinal {
    sp: SingularFinalParams,
    domain: DomainGeometry,
}

impl FamilyMembers for SingularFinal {
    fn name(&self) -> &str {
        "singular_final"
    }

    fn member(&self, j: u64) -> Result<ScalarField> {
        let sp = &self.sp;
        let n = sp.n;
        let m = sp.m(j);
        let outer = ScalarField::constant(n, m).with_derivatives(
            Derivatives::new()
                .with_dt(|_| 0.0)
                .with_grad(move |_| vec![0.0; n])
                .with_p_laplacian(|_| 0.0),
        );
        let r = sp.region_radius(j);
        let region: Region = Arc::new(move |z| z.x_norm() < r && z.t < 0.0);
        let bbox = SpaceTimeBox::new(vec![-r; n], vec![r; n], -1.0, 0.0)?;
        let opts = PasteOptions {
            collar: Some(1e-6 * r),
            ..PasteOptions::default()
        };
        paste_min(&outer, &sp.u(j), region, &bbox, &self.domain, &opts)
    }

    fn gauge(&self, z: &SpaceTimePoint) -> f64 {
        (-z.t).max(0.0).powf(1.0 / (2.0 - self.sp.p))
    }

    fn index_for_gauge(&self, k: f64) -> Result<u64> {
        first_index(self.sp.j_min(), |j| self.sp.gauge_index_ok(j, k))
    }

    fn constants(&self, j: Option<u64>) -> BTreeMap<String, f64> {
        let sp = &self.sp;
        let mut c = BTreeMap::from([
            ("alpha".to_string(), sp.alpha),
            ("alpha_window_lo".to_string(), sp.alpha_window.0),
            ("alpha_window_hi".to_string(), sp.alpha_window.1),
            ("m_exponent".to_string(), sp.m_exponent()),
            ("C_n".to_string(), sp.residual_constant()),
            ("K".to_string(), sp.k),
            ("l".to_string(), sp.l),
        ]);
        if let Some(j) = j {
            c.insert("m_j".into(), sp.m(j));
            c.insert("region_radius".into(), sp.region_radius(j));
        }
        c
    }
}

/// Barriers at the final point of `{-1 < t < 0, |x|^l < K(-t)}` for `1 < p < 2`.
pub fn make_singular_final_family(sp: &SingularFinalParams) -> Result<BarrierFamily> {
    let domain = make_domain(&DomainSpec::SingularFinal {
        k: sp.k,
        l: sp.l,
        p: sp.p,
        n: sp.n,
    })?;
    let members = SingularFinal {
        sp: sp.clone(),
        domain: domain.clone(),
    };
    Ok(BarrierFamily::new(
        members,
        sp.j_min(),
        domain,
        SpaceTimePoint::origin(sp.n),
        SolutionKind::Supersolution,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp() -> SingularFinalParams {
        SingularFinalParams::new(&PParams::new(1.5, 1).unwrap(), 1.0, 2.0, None).unwrap()
    }

    #[test]
    fn window_and_default_alpha() {
        let s = sp();
        assert!((s.alpha_window.0 - 4.0).abs() < 1e-14);
        assert!((s.alpha_window.1 - 4.5).abs() < 1e-14);
        assert!((s.alpha - 4.25).abs() < 1e-14);
    }

    #[test]
    fn m_closed_form() {
        let s = sp();
        for j in [1u64, 16, 81] {
            let expect = 0.01171875 * (j as f64).powf(0.25);
            assert!((s.m(j) - expect).abs() < 1e-15 * expect.max(1.0) * 10.0, "{j}");
        }
    }

    #[test]
    fn rejects_empty_window() {
        let params = PParams::new(1.5, 1).unwrap();
        assert!(SingularFinalParams::new(&params, 1.5, 2.0, None).is_err());
        assert!(SingularFinalParams::new(&params, 1.0, 0.5, None).is_err());
        assert!(SingularFinalParams::new(&params, 1.0, 2.0, Some(4.6)).is_err());
        assert!(SingularFinalParams::new(&PParams::new(2.5, 1).unwrap(), 1.0, 2.0, None).is_err());
    }

    #[test]
    fn u_on_axis() {
        let s = sp();
        let u = s.u(4);
        let t = -1e-3;
        let expect = 4f64.powf(3.25) * 0.5 * (1e-3f64 / 4.0).powi(2);
        assert!((u.value(&SpaceTimePoint::new(vec![0.0], t)) - expect).abs() < 1e-15);
    }

    #[test]
    fn pasted_member() {
        let fam = make_singular_final_family(&sp()).unwrap();
        let j = fam.j_min;
        let w = fam.member(j).unwrap();
        let m = fam.constants(Some(j))["m_j"];
        assert_eq!(w.value(&SpaceTimePoint::new(vec![1.5], -0.9)), m);
        assert!(w.value(&SpaceTimePoint::new(vec![0.0], -1e-4)) < m);
    }
}

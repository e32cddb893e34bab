use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{BarrierFamily, FamilyMembers, SolutionKind};
use crate::field::{norm, Derivatives, ScalarField, SpaceTimePoint};
use crate::geometry::{make_domain, DomainSpec};
use crate::params::PParams;

/// Exterior ball `B(ξ₁, R₁)` touching the domain at `ξ₀ = 0`, with the
/// derived half-ball `ξ₂ = ξ₁/2`, `R₂ = R₁/2` and constants `δ, C₀, C₁, j₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorBallParams {
    pub p: f64,
    pub n: usize,
    pub xi1: Vec<f64>,
    pub r1: f64,
    pub xi2: Vec<f64>,
    pub r2: f64,
    pub delta: f64,
    pub c0: f64,
    pub c1: f64,
    pub j0: u64,
}

impl ExteriorBallParams {
    /// `xi1` lists the space coordinates of the centre followed by time; the
    /// radius is `|ξ₁|` so that the origin lies on the sphere.
    pub fn new(params: &PParams, xi1: Vec<f64>) -> Result<Self> {
        params.validate()?;
        params.require_p_ne_2("exterior ball barrier")?;
        let (p, n) = (params.p, params.n);
        if xi1.len() != n + 1 {
            return Err(Error::param(format!("ξ₁ needs {} coordinates", n + 1)));
        }
        let x1 = &xi1[..n];
        if norm(x1) == 0.0 {
            return Err(Error::param("x₁ = 0: the origin is a pole of the exterior ball"));
        }
        let r1 = norm(&xi1);
        let xi2: Vec<f64> = xi1.iter().map(|a| 0.5 * a).collect();
        let r2 = 0.5 * r1;
        let delta = 0.5 * norm(&xi2[..n]);
        let c0 = if p < 2.0 {
            (2.0 * r2).powf(p - 2.0) * delta * delta
        } else {
            delta.powf(p)
        };
        let c1 = r2 / (2f64.powf(p - 3.0) * (p - 1.0) * c0);
        let j0 = ((n as f64 + p - 2.0) / ((p - 1.0) * delta * delta)).ceil().max(1.0) as u64;
        Ok(ExteriorBallParams {
            p,
            n,
            xi1,
            r1,
            xi2,
            r2,
            delta,
            c0,
            c1,
            j0,
        })
    }

    /// `log γ(j)` with `γ = (C₁ j^{1-p})^{1/(p-2)} e^{jR₂²}` for `p < 2` and
    /// `e^{4jR₂²}` for `p > 2`.
    pub fn ln_gamma(&self, j: u64) -> f64 {
        let jf = j as f64;
        let p = self.p;
        let base = (self.c1.ln() + (1.0 - p) * jf.ln()) / (p - 2.0);
        let r22 = self.r2 * self.r2;
        if p < 2.0 {
            base + jf * r22
        } else {
            base + 4.0 * jf * r22
        }
    }

    /// `|ξ - ξ₂|²` and `|x - x₂|`.
    fn radii(&self, z: &SpaceTimePoint) -> (f64, f64) {
        let n = self.n;
        let dx: f64 = (0..n).map(|i| (z.x[i] - self.xi2[i]).powi(2)).sum();
        (dx + (z.t - self.xi2[n]).powi(2), dx.sqrt())
    }
}

struct ExteriorBall {
    ball: ExteriorBallParams,
}

impl FamilyMembers for ExteriorBall {
    fn name(&self) -> &str {
        "exterior_ball"
    }

    fn member(&self, j: u64) -> Result<ScalarField> {
        let b = self.ball.clone();
        let jf = j as f64;
        let lg = b.ln_gamma(j);
        let (p, n) = (b.p, b.n);
        let r22 = b.r2 * b.r2;
        let t2 = b.xi2[n];
        let (bv, bd, bg, bl) = (b.clone(), b.clone(), b.clone(), b);
        let value = move |z: &SpaceTimePoint| {
            let (rr, _) = bv.radii(z);
            (lg - jf * r22).exp() * -(-jf * (rr - r22)).exp_m1()
        };
        let derivs = Derivatives::new()
            .with_dt(move |z| {
                let (rr, _) = bd.radii(z);
                2.0 * jf * (z.t - t2) * (lg - jf * rr).exp()
            })
            .with_grad(move |z| {
                let (rr, _) = bg.radii(z);
                let s = 2.0 * jf * (lg - jf * rr).exp();
                (0..n).map(|i| s * (z.x[i] - bg.xi2[i])).collect()
            })
            .with_p_laplacian(move |z| {
                let (rr, rx) = bl.radii(z);
                let mag = ((p - 1.0) * ((2.0 * jf).ln() + lg) - jf * (p - 1.0) * rr).exp();
                mag * rx.powf(p - 2.0) * (n as f64 + p - 2.0 - 2.0 * jf * (p - 1.0) * rx * rx)
            });
        Ok(ScalarField::new(n, value).with_derivatives(derivs))
    }

    fn gauge(&self, z: &SpaceTimePoint) -> f64 {
        let (rr, _) = self.ball.radii(z);
        -(-(rr - self.ball.r2 * self.ball.r2)).exp_m1()
    }

    fn index_for_gauge(&self, k: f64) -> Result<u64> {
        let r22 = self.ball.r2 * self.ball.r2;
        let lk = k.ln();
        let mut j = self.ball.j0;
        while self.ball.ln_gamma(j) - j as f64 * r22 < lk {
            j += 1;
            if j > self.ball.j0 + 10_000_000 {
                return Err(Error::numerical("exterior ball gauge index search did not terminate"));
            }
        }
        Ok(j)
    }

    fn constants(&self, j: Option<u64>) -> BTreeMap<String, f64> {
        let b = &self.ball;
        let mut c = BTreeMap::from([
            ("R1".to_string(), b.r1),
            ("R2".to_string(), b.r2),
            ("delta".to_string(), b.delta),
            ("C0".to_string(), b.c0),
            ("C1".to_string(), b.c1),
            ("j0".to_string(), b.j0 as f64),
        ]);
        if let Some(j) = j {
            c.insert("ln_gamma".into(), b.ln_gamma(j));
            c.insert("gamma".into(), b.ln_gamma(j).exp());
        }
        c
    }
}

/// Exterior-ball barriers on `Θ₀ = (B(0,δ) \ B̄(ξ₁,R₁))`.
pub fn make_exterior_ball_family(params: &PParams, ball: &ExteriorBallParams) -> Result<BarrierFamily> {
    params.require_p_ne_2("exterior ball barrier")?;
    let n = params.n;
    let d = ball.delta;
    let domain = make_domain(&DomainSpec::Intersection {
        parts: vec![
            DomainSpec::BallComplement {
                center: ball.xi1.clone(),
                radius: ball.r1,
                lo: vec![-d; n],
                hi: vec![d; n],
                t0: -d,
                t1: d,
            },
            DomainSpec::Ball {
                center: vec![0.0; n + 1],
                radius: d,
            },
        ],
    })?;
    Ok(BarrierFamily::new(
        ExteriorBall { ball: ball.clone() },
        ball.j0,
        domain,
        SpaceTimePoint::origin(n),
        SolutionKind::Supersolution,
    ))
}

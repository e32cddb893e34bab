use crate::error::{Error, Result};
use crate::field::{Derivatives, ScalarField, SpaceTimePoint};
use crate::params::PParams;

#[derive(Clone, Copy)]
struct Profile {
    p: f64,
    n: f64,
    lam: f64,
    cb: f64,
    c: f64,
}

impl Profile {
    fn new(params: &PParams, c: f64) -> Result<Self> {
        params.validate()?;
        params.require_p_ne_2("Barenblatt solution")?;
        params.require_lambda_positive("Barenblatt solution")?;
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param(format!("profile constant must be > 0, got {c}")));
        }
        let (p, lam) = (params.p, params.lambda());
        Ok(Profile {
            p,
            n: params.n as f64,
            lam,
            cb: (p - 2.0) / p * lam.powf(1.0 / (1.0 - p)),
            c,
        })
    }

    /// `(ζ, Ψ)` with `ζ = |x|t^{-1/λ}` and `Ψ = C - c_b ζ^{p/(p-1)}`, clipped
    /// at zero outside the support when `p > 2`.
    fn psi(&self, z: &SpaceTimePoint) -> (f64, f64) {
        let zeta = z.x_norm() * z.t.powf(-1.0 / self.lam);
        let psi = self.c - self.cb * zeta.powf(self.p / (self.p - 1.0));
        (zeta, psi.max(0.0))
    }

    fn value(&self, z: &SpaceTimePoint) -> f64 {
        let (_, psi) = self.psi(z);
        z.t.powf(-self.n / self.lam) * psi.powf((self.p - 1.0) / (self.p - 2.0))
    }

    fn dt(&self, z: &SpaceTimePoint) -> f64 {
        let p = self.p;
        let (zeta, psi) = self.psi(z);
        if psi == 0.0 {
            return 0.0;
        }
        -z.t.powf(-1.0 - self.n / self.lam) / self.lam
            * psi.powf(1.0 / (p - 2.0))
            * (self.n * psi - p / (p - 2.0) * self.cb * zeta.powf(p / (p - 1.0)))
    }

    fn grad(&self, z: &SpaceTimePoint) -> Vec<f64> {
        let p = self.p;
        let r = z.x_norm();
        let (zeta, psi) = self.psi(z);
        if r == 0.0 || psi == 0.0 {
            return vec![0.0; z.x.len()];
        }
        let s = -self.lam.powf(-1.0 / (p - 1.0))
            * z.t.powf(-(self.n + 1.0) / self.lam)
            * psi.powf(1.0 / (p - 2.0))
            * zeta.powf(1.0 / (p - 1.0))
            / r;
        z.x.iter().map(|v| s * v).collect()
    }
}

/// The Barenblatt solution
/// `B(x,t) = t^{-n/λ}(C - ((p-2)/p)λ^{1/(1-p)}(|x|/t^{1/λ})^{p/(p-1)})₊^{(p-1)/(p-2)}`.
pub fn barenblatt(params: &PParams, c: f64, z: &SpaceTimePoint) -> Result<f64> {
    let prof = Profile::new(params, c)?;
    if !(z.t > 0.0) {
        return Err(Error::param(format!(
            "the Barenblatt solution needs t > 0, got {}",
            z.t
        )));
    }
    if z.dim() != params.n {
        return Err(Error::param("point dimension differs from n"));
    }
    Ok(prof.value(z))
}

/// The Barenblatt solution as a field on `t > 0` with closed-form derivatives;
/// `Δ_p B = ∂ₜB`.
pub fn barenblatt_field(params: &PParams, c: f64) -> Result<ScalarField> {
    let prof = Profile::new(params, c)?;
    let derivs = Derivatives::new()
        .with_dt(move |z| prof.dt(z))
        .with_grad(move |z| prof.grad(z))
        .with_p_laplacian(move |z| prof.dt(z));
    Ok(ScalarField::new(params.n, move |z| prof.value(z))
        .with_derivatives(derivs)
        .with_label(format!("barenblatt C={c}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_origin() {
        let params = PParams::new(3.0, 1).unwrap();
        let v = barenblatt(&params, 1.0, &SpaceTimePoint::new(vec![0.0], 1.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = barenblatt(&params, 2.0, &SpaceTimePoint::new(vec![0.0], 3.0)).unwrap();
        assert!((v - 3f64.powf(-0.25) * 4.0).abs() < 1e-14);
    }

    #[test]
    fn support_edge() {
        // p = 3, n = 1: c_b = 1/6, so the support at t = 1 is |x| ≤ 6^{2/3}.
        let params = PParams::new(3.0, 1).unwrap();
        let edge = 6f64.powf(2.0 / 3.0);
        assert_eq!(
            barenblatt(&params, 1.0, &SpaceTimePoint::new(vec![edge * 1.0001], 1.0)).unwrap(),
            0.0
        );
        assert!(barenblatt(&params, 1.0, &SpaceTimePoint::new(vec![edge * 0.999], 1.0)).unwrap() > 0.0);
    }

    #[test]
    fn rejections() {
        let z = SpaceTimePoint::new(vec![0.0], 1.0);
        assert!(barenblatt(
            &PParams::new(3.0, 1).unwrap(),
            1.0,
            &SpaceTimePoint::new(vec![0.0], 0.0)
        )
        .is_err());
        assert!(barenblatt(&PParams::new(2.0, 1).unwrap(), 1.0, &z).is_err());
        // λ = 2(1.2 - 2) + 1.2 < 0.
        assert!(barenblatt(
            &PParams::new(1.2, 2).unwrap(),
            1.0,
            &SpaceTimePoint::new(vec![0.0, 0.0], 1.0)
        )
        .is_err());
        assert!(barenblatt(&PParams::new(1.5, 1).unwrap(), 1.0, &z).is_ok());
    }

    #[test]
    fn closed_forms_match_fd() {
        for p in [1.6, 3.0] {
            let params = PParams::new(p, 1).unwrap();
            let b = barenblatt_field(&params, 1.0).unwrap();
            let z = SpaceTimePoint::new(vec![0.4], 1.3);
            let h = 1e-5;
            assert!((b.closed_dt(&z).unwrap() - b.fd_dt(&z, h)).abs() < 1e-7);
            assert!((b.closed_grad(&z).unwrap()[0] - b.fd_grad(&z, h)[0]).abs() < 1e-7);
        }
    }
}

//! Pointwise `Δ_p` and residual evaluation, sampled certification of the
//! supersolution inequality, and a weak-form check by quadrature.

mod certify;
mod weak;

pub use certify::{certify, CertOptions, CertReport, PointRecord, PointStatus};
pub use weak::{gauss_legendre, weak_form_check, TestBump};

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpaceTimePoint};
use crate::params::PParams;

/// Below this gradient norm the expanded `Δ_p` is not formed.
pub const DEGENERATE_FLOOR: f64 = 1e-10;

/// Value of a differential operator at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorValue {
    Finite(f64),
    /// `|∇u|` below [`DEGENERATE_FLOOR`] with `p < 2`.
    Degenerate,
}

impl OperatorValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            OperatorValue::Finite(v) => Some(v),
            OperatorValue::Degenerate => None,
        }
    }
}

fn check_finite(what: &str, z: &SpaceTimePoint, v: &[f64]) -> Result<()> {
    if v.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(Error::numerical(format!("non-finite {what} at {z:?}: {v:?}")))
    }
}

/// `|∇u|^{p-2}[Δu + (p-2)⟨D²u ∇u, ∇u⟩/|∇u|²]` from a gradient and a
/// row-major Hessian.
fn expanded(p: f64, grad: &[f64], hess: &[f64]) -> OperatorValue {
    let n = grad.len();
    let lap: f64 = (0..n).map(|i| hess[i * n + i]).sum();
    if p == 2.0 {
        return OperatorValue::Finite(lap);
    }
    let g2: f64 = grad.iter().map(|g| g * g).sum();
    let g = g2.sqrt();
    if g < DEGENERATE_FLOOR {
        return if p > 2.0 {
            OperatorValue::Finite(0.0)
        } else {
            OperatorValue::Degenerate
        };
    }
    let mut quad = 0.0;
    for i in 0..n {
        for k in 0..n {
            quad += hess[i * n + k] * grad[i] * grad[k];
        }
    }
    OperatorValue::Finite(g.powf(p - 2.0) * (lap + (p - 2.0) * quad / g2))
}

/// `Δ_p u` at `z`: the attached closed form when present, otherwise the
/// expanded formula with closed or finite-difference derivatives (`step`
/// overrides the field's default step).
pub fn p_laplacian_at(
    field: &ScalarField,
    params: &PParams,
    z: &SpaceTimePoint,
    step: Option<f64>,
) -> Result<OperatorValue> {
    if let Some(v) = field.closed_p_laplacian(z) {
        check_finite("Δ_p", z, &[v])?;
        return Ok(OperatorValue::Finite(v));
    }
    let grad = field
        .closed_grad(z)
        .unwrap_or_else(|| step.map_or_else(|| field.grad(z), |h| field.fd_grad(z, h)));
    let hess = field
        .closed_hessian(z)
        .unwrap_or_else(|| step.map_or_else(|| field.hessian(z), |h| field.fd_hessian(z, h)));
    check_finite("gradient", z, &grad)?;
    check_finite("Hessian", z, &hess)?;
    Ok(expanded(params.p, &grad, &hess))
}

/// `Δ_p u` from central differences of the value only.
pub fn p_laplacian_fd(field: &ScalarField, params: &PParams, z: &SpaceTimePoint, step: f64) -> Result<OperatorValue> {
    let grad = field.fd_grad(z, step);
    let hess = field.fd_hessian(z, step);
    check_finite("gradient", z, &grad)?;
    check_finite("Hessian", z, &hess)?;
    Ok(expanded(params.p, &grad, &hess))
}

fn combine(params: &PParams, z: &SpaceTimePoint, dt: f64, plap: OperatorValue) -> Result<OperatorValue> {
    check_finite("∂ₜ", z, &[dt])?;
    Ok(match plap {
        OperatorValue::Finite(l) => OperatorValue::Finite(params.a * dt - l),
        OperatorValue::Degenerate => OperatorValue::Degenerate,
    })
}

/// `a ∂ₜu - Δ_p u`; nonnegative for supersolutions.
pub fn residual_at(
    field: &ScalarField,
    params: &PParams,
    z: &SpaceTimePoint,
    step: Option<f64>,
) -> Result<OperatorValue> {
    let dt = field
        .closed_dt(z)
        .unwrap_or_else(|| step.map_or_else(|| field.dt(z), |h| field.fd_dt(z, h)));
    combine(params, z, dt, p_laplacian_at(field, params, z, step)?)
}

/// [`residual_at`] with every derivative taken by central differences.
pub fn residual_fd(field: &ScalarField, params: &PParams, z: &SpaceTimePoint, step: f64) -> Result<OperatorValue> {
    combine(params, z, field.fd_dt(z, step), p_laplacian_fd(field, params, z, step)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barriers::{make_psi_family, psi_residual, NorthPoleParams};
    use crate::field::Derivatives;

    fn pt(x: f64, t: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(vec![x], t)
    }

    #[test]
    fn linear_is_p_harmonic() {
        for p in [1.5, 2.0, 3.0] {
            let params = PParams::new(p, 1).unwrap();
            let u = ScalarField::new(1, |z| z.x[0]);
            let v = p_laplacian_at(&u, &params, &pt(0.3, 0.0), Some(1e-4)).unwrap();
            assert!(v.finite().unwrap().abs() < 1e-6, "p={p}");
        }
    }

    #[test]
    fn radial_power_has_unit_p_laplacian() {
        // u = (2/3)|x|^{3/2}, p = 3: (|u'| u')' = (x)' = 1.
        let params = PParams::new(3.0, 1).unwrap();
        let u = ScalarField::new(1, |z| 2.0 / 3.0 * z.x[0].abs().powf(1.5));
        let v = p_laplacian_fd(&u, &params, &pt(1.0, 0.0), 1e-4).unwrap();
        assert!((v.finite().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_handling() {
        let u = ScalarField::constant(1, 2.0);
        let z = pt(0.1, 0.1);
        assert_eq!(
            p_laplacian_fd(&u, &PParams::new(3.0, 1).unwrap(), &z, 1e-3).unwrap(),
            OperatorValue::Finite(0.0)
        );
        assert_eq!(
            p_laplacian_fd(&u, &PParams::new(1.5, 1).unwrap(), &z, 1e-3).unwrap(),
            OperatorValue::Degenerate
        );
        assert_eq!(
            residual_fd(&u, &PParams::new(3.0, 1).unwrap(), &z, 1e-3).unwrap(),
            OperatorValue::Finite(0.0)
        );
    }

    #[test]
    fn psi_fd_matches_closed_form() {
        let params = PParams::new(3.0, 1).unwrap();
        let base = SpaceTimePoint::origin(1);
        let fam = make_psi_family(&params, 1.0, &base).unwrap();
        let w = fam.member(3).unwrap();
        let z = pt(0.2, 0.4);
        let fd = residual_fd(&w, &params, &z, 1e-4).unwrap().finite().unwrap();
        assert!((fd - psi_residual(&params, 1.0, &base, 3, &z)).abs() < 1e-6);
    }

    #[test]
    fn north_pole_f_residual_vanishes() {
        let params = PParams::new(3.0, 1).unwrap();
        let np = NorthPoleParams::new(&params, 1.0, 4.0, 1.6).unwrap();
        let f = np.f(5);
        let z = pt(0.4, -0.1);
        assert!(residual_fd(&f, &params, &z, 1e-4).unwrap().finite().unwrap().abs() < 1e-5);
        assert_eq!(residual_at(&f, &params, &z, None).unwrap(), OperatorValue::Finite(0.0));
    }

    #[test]
    fn p_greater_two_extension_is_continuous() {
        // u = x⁴, p = 4: Δ_p u = 3|u'|² u'' → 0 at x = 0.
        let params = PParams::new(4.0, 1).unwrap();
        let u = ScalarField::new(1, |z| z.x[0].powi(4)).with_derivatives(
            Derivatives::new()
                .with_grad(|z| vec![4.0 * z.x[0].powi(3)])
                .with_hessian(|z| vec![12.0 * z.x[0].powi(2)]),
        );
        let at0 = p_laplacian_at(&u, &params, &pt(0.0, 0.0), None)
            .unwrap()
            .finite()
            .unwrap();
        let near = p_laplacian_at(&u, &params, &pt(1e-3, 0.0), None)
            .unwrap()
            .finite()
            .unwrap();
        assert_eq!(at0, 0.0);
        assert!(near.abs() < 1e-12);
    }
}

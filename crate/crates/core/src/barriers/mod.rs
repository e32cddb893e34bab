//! Explicit barrier families and their constants.
//!
//! Each constructor returns a [`BarrierFamily`] whose members carry closed-form
//! time derivative, gradient and p-Laplacian. Pasted members (`min{u, m}` on a
//! subregion) select the active branch pointwise and fall back to finite
//! differences in a thin collar around the pasting interface.

mod barenblatt;
mod conditions;
mod cone;
mod exterior_ball;
mod north_pole;
mod paste;
mod petrovskii;
mod psi;
mod singular;

use serde::{Deserialize, Serialize};

pub use barenblatt::{barenblatt, barenblatt_field};
pub use conditions::{check_family_conditions, ConditionOptions, ConditionReport, GaugeRow};
pub use cone::{cone_alpha, cone_mu0, make_cone1d_family};
pub use exterior_ball::{make_exterior_ball_family, ExteriorBallParams};
pub use north_pole::{make_north_pole_family, NorthPoleParams};
pub use paste::{interface_jump, paste_min, paste_min_unchecked, InterfaceJump, PasteOptions, Region};
pub use petrovskii::{make_petrovskii_family, supercritical_single_barrier, PetrovskiiParams, SingleBarrier};
pub use psi::{make_psi_family, psi_residual};
pub use singular::{make_singular_final_family, SingularFinalParams};

use crate::error::{Error, Result};
use crate::family::BarrierFamily;
use crate::field::SpaceTimePoint;
use crate::params::PParams;

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping when the
/// bracket is below `rel_tol` relative to its position. Returns `(argmax, max)`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if (b - a).abs() <= rel_tol * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Smallest integer `j ≥ start` with `pred(j)`, by doubling then bisection.
/// `pred` must be monotone (false then true).
pub(crate) fn first_index(start: u64, pred: impl Fn(u64) -> bool) -> Result<u64> {
    let start = start.max(1);
    if pred(start) {
        return Ok(start);
    }
    let mut lo = start;
    let mut hi = start.saturating_mul(2);
    while !pred(hi) {
        if hi >= 1 << 62 {
            return Err(Error::numerical("index search exceeded 2^62"));
        }
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Serializable description of a barrier family (same JSON dialect as domains).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Psi {
        #[serde(default = "one")]
        diam: f64,
        /// Base point coordinates `(x₀, t₀)`; the origin when omitted.
        #[serde(default)]
        base: Option<Vec<f64>>,
    },
    ExteriorBall {
        /// Centre `ξ₁` of the exterior ball; `ξ₀ = 0` lies on its boundary.
        xi1: Vec<f64>,
    },
    NorthPole {
        theta: f64,
        l: f64,
        k: f64,
    },
    Cone1d {
        gamma: f64,
    },
    Petrovskii {
        alpha: f64,
        k: f64,
    },
    SingularFinal {
        l: f64,
        k: f64,
        #[serde(default)]
        alpha: Option<f64>,
    },
    Barenblatt {
        #[serde(default = "one")]
        c: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Psi { .. } => "psi",
            FamilySpec::ExteriorBall { .. } => "exterior_ball",
            FamilySpec::NorthPole { .. } => "north_pole",
            FamilySpec::Cone1d { .. } => "cone1d",
            FamilySpec::Petrovskii { .. } => "petrovskii",
            FamilySpec::SingularFinal { .. } => "singular_final",
            FamilySpec::Barenblatt { .. } => "barenblatt",
        }
    }
}

/// Builds the barrier family described by `spec`. The Barenblatt solution is
/// not a barrier family and is rejected here; see [`barenblatt_field`].
pub fn make_family(params: &PParams, spec: &FamilySpec) -> Result<BarrierFamily> {
    match spec {
        FamilySpec::Psi { diam, base } => {
            let base = match base {
                Some(c) => SpaceTimePoint::from_coords(c),
                None => SpaceTimePoint::origin(params.n),
            };
            make_psi_family(params, *diam, &base)
        }
        FamilySpec::ExteriorBall { xi1 } => {
            make_exterior_ball_family(params, &ExteriorBallParams::new(params, xi1.clone())?)
        }
        FamilySpec::NorthPole { theta, l, k } => make_north_pole_family(params, *theta, *l, *k),
        FamilySpec::Cone1d { gamma } => make_cone1d_family(params, *gamma),
        FamilySpec::Petrovskii { alpha, k } => make_petrovskii_family(&PetrovskiiParams::new(params, *alpha, *k)?),
        FamilySpec::SingularFinal { l, k, alpha } => {
            make_singular_final_family(&SingularFinalParams::new(params, *l, *k, *alpha)?)
        }
        FamilySpec::Barenblatt { .. } => Err(Error::param(
            "the Barenblatt solution is certified as a field, not as a barrier family",
        )),
    }
}

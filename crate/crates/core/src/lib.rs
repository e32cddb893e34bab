//! Numerical laboratory for boundary regularity of the p-parabolic equation
//! `a ∂ₜu = div(|∇u|^{p-2} ∇u)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`], [`field`] and [`family`] hold the shared abstractions
//!   (exponent and dimension, space-time scalar fields, indexed barrier families).
//! * [`geometry`] builds space-time domains, rasterizes them to masks and
//!   classifies parabolic boundaries of cylinder unions.
//! * [`barriers`] implements the explicit barrier families with their constants.
//! * [`residual`] evaluates `Δ_p` and certifies the supersolution inequality.
//! * [`solver`] is an explicit monotone finite-difference solver with probes,
//!   comparison and scaling checks.

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod error;
pub mod family;
pub mod field;
pub mod geometry;
pub mod params;
pub mod residual;
pub mod solver;

pub use error::{Error, Result};
pub use family::{BarrierFamily, FamilyMembers, SolutionKind};
pub use field::{field_from_closure, Derivatives, ScalarField, SpaceTimePoint};
pub use geometry::{make_domain, DomainGeometry, DomainSpec, SpaceTimeBox};
pub use params::{lambda_of, PParams};

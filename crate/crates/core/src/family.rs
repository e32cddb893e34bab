//! Indexed barrier families `j ↦ w_j` with their gauge and domain.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpaceTimePoint};
use crate::geometry::DomainGeometry;

/// Which side of the equation the members are expected to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    /// `a ∂ₜw - Δ_p w ≥ 0`.
    Supersolution,
    /// `a ∂ₜw - Δ_p w ≤ 0`.
    Subsolution,
}

/// Family-specific behaviour behind a [`BarrierFamily`].
pub trait FamilyMembers: Send + Sync {
    fn name(&self) -> &str;

    /// Member `j`; the caller has already checked `j ≥ j_min`.
    fn member(&self, j: u64) -> Result<ScalarField>;

    /// The gauge `d` with `d(ξ₀) = 0` and `d > 0` elsewhere.
    fn gauge(&self, z: &SpaceTimePoint) -> f64;

    /// Smallest admissible index `j(k)` with `w_{j(k)} ≥ k·d` on the domain.
    fn index_for_gauge(&self, k: f64) -> Result<u64>;

    /// Calibration constants, including per-member ones when `j` is given.
    fn constants(&self, j: Option<u64>) -> BTreeMap<String, f64>;

    /// Radii used for the vanishing test at the base point.
    fn limit_radii(&self) -> Vec<f64> {
        vec![2f64.powi(-6), 2f64.powi(-12), 2f64.powi(-24)]
    }

    /// A random domain point within distance `r` of `center`, if one is found.
    fn sample_near(
        &self,
        domain: &DomainGeometry,
        center: &SpaceTimePoint,
        r: f64,
        rng: &mut ChaCha8Rng,
    ) -> Option<SpaceTimePoint> {
        rejection_sample_ball(domain, center, r, rng)
    }
}

pub(crate) fn rejection_sample_ball(
    domain: &DomainGeometry,
    center: &SpaceTimePoint,
    r: f64,
    rng: &mut ChaCha8Rng,
) -> Option<SpaceTimePoint> {
    let c = center.coords();
    for _ in 0..10_000 {
        let q: Vec<f64> = c.iter().map(|&ci| ci + r * rng.gen_range(-1.0..1.0)).collect();
        let z = SpaceTimePoint::from_coords(&q);
        if z.distance(center) < r && domain.contains(&z) {
            return Some(z);
        }
    }
    None
}

/// An indexed family of barriers at a boundary point `ξ₀` of its domain.
#[derive(Clone)]
pub struct BarrierFamily {
    members: Arc<dyn FamilyMembers>,
    pub j_min: u64,
    pub domain: DomainGeometry,
    pub base_point: SpaceTimePoint,
    pub kind: SolutionKind,
}

impl fmt::Debug for BarrierFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BarrierFamily")
            .field("name", &self.name())
            .field("j_min", &self.j_min)
            .field("domain", &self.domain.label())
            .field("base_point", &self.base_point)
            .field("kind", &self.kind)
            .finish()
    }
}

impl BarrierFamily {
    pub fn new(
        members: impl FamilyMembers + 'static,
        j_min: u64,
        domain: DomainGeometry,
        base_point: SpaceTimePoint,
        kind: SolutionKind,
    ) -> Self {
        BarrierFamily {
            members: Arc::new(members),
            j_min,
            domain,
            base_point,
            kind,
        }
    }

    pub fn name(&self) -> &str {
        self.members.name()
    }

    pub fn member(&self, j: u64) -> Result<ScalarField> {
        if j < self.j_min {
            return Err(Error::param(format!(
                "{}: index {j} is below j_min = {}",
                self.name(),
                self.j_min
            )));
        }
        Ok(self
            .members
            .member(j)?
            .with_domain(self.domain.clone())
            .with_label(format!("{} j={j}", self.name())))
    }

    pub fn gauge(&self, z: &SpaceTimePoint) -> f64 {
        self.members.gauge(z)
    }

    pub fn index_for_gauge(&self, k: f64) -> Result<u64> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::param(format!("gauge level must be > 0, got {k}")));
        }
        Ok(self.members.index_for_gauge(k)?.max(self.j_min))
    }

    pub fn constants(&self, j: Option<u64>) -> BTreeMap<String, f64> {
        let mut c = self.members.constants(j);
        c.insert("j_min".into(), self.j_min as f64);
        c
    }

    pub fn limit_radii(&self) -> Vec<f64> {
        self.members.limit_radii()
    }

    pub fn sample_near(&self, r: f64, rng: &mut ChaCha8Rng) -> Option<SpaceTimePoint> {
        self.members.sample_near(&self.domain, &self.base_point, r, rng)
    }
}

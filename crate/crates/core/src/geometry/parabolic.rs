use serde::{Deserialize, Serialize};

use crate::field::SpaceTimePoint;

/// Open cylinder `(lo, hi) × (t1, t2)` with a box base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub t1: f64,
    pub t2: f64,
}

impl Cylinder {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, t1: f64, t2: f64) -> Self {
        Cylinder { lo, hi, t1, t2 }
    }

    fn in_open_base(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| *x > *a && *x < *b)
    }

    fn in_closed_base(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| *x >= *a && *x <= *b)
    }

    pub fn contains(&self, z: &SpaceTimePoint) -> bool {
        z.t > self.t1 && z.t < self.t2 && self.in_open_base(&z.x)
    }

    /// `(Ū × {t₁}) ∪ (∂U × (t₁, t₂])`.
    pub fn in_parabolic_boundary(&self, z: &SpaceTimePoint) -> bool {
        let closed = self.in_closed_base(&z.x);
        let bottom = closed && z.t == self.t1;
        let lateral = closed && !self.in_open_base(&z.x) && z.t > self.t1 && z.t <= self.t2;
        bottom || lateral
    }
}

/// Parabolic boundary of a finite union of open cylinders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicBoundary {
    pub cylinders: Vec<Cylinder>,
}

impl ParabolicBoundary {
    /// `z ∈ (∪ ∂_p Uⁱ) \ ∪ Uⁱ`.
    pub fn contains(&self, z: &SpaceTimePoint) -> bool {
        self.cylinders.iter().any(|c| c.in_parabolic_boundary(z)) && !self.cylinders.iter().any(|c| c.contains(z))
    }
}

pub fn parabolic_boundary(cylinders: Vec<Cylinder>) -> ParabolicBoundary {
    ParabolicBoundary { cylinders }
}

//! Space-time domains, their rasterization to cell masks, and the parabolic
//! boundary of finite unions of cylinders.
//!
//! All memberships are strict (open sets). Every domain carries a bounding box
//! and `contains` is false outside it.

mod mask;
mod parabolic;
mod sampling;

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpaceTimePoint;

pub use mask::{rasterize, uniform_levels, BoundaryClass, ExposedCell, SpaceTimeMask};
pub use parabolic::{parabolic_boundary, Cylinder, ParabolicBoundary};
pub use sampling::{halton, sample_domain, HaltonSampler};

/// Axis-aligned box `[lo, hi] × [t0, t1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
}

impl SpaceTimeBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, t0: f64, t1: f64) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::param("box bounds must be nonempty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) || !(t0 < t1) {
            return Err(Error::param(format!(
                "box must have lo < hi in every coordinate: {lo:?} {hi:?} [{t0}, {t1}]"
            )));
        }
        Ok(SpaceTimeBox { lo, hi, t0, t1 })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Membership in the closed box.
    pub fn contains_closed(&self, z: &SpaceTimePoint) -> bool {
        z.t >= self.t0
            && z.t <= self.t1
            && z.x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| *x >= *a && *x <= *b)
    }

    /// Membership in the open box.
    pub fn contains_open(&self, z: &SpaceTimePoint) -> bool {
        z.t > self.t0
            && z.t < self.t1
            && z.x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| *x > *a && *x < *b)
    }

    pub fn diameter(&self) -> f64 {
        let s: f64 = self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a) * (b - a)).sum();
        (s + (self.t1 - self.t0).powi(2)).sqrt()
    }

    pub fn intersect(&self, other: &SpaceTimeBox) -> Option<SpaceTimeBox> {
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        SpaceTimeBox::new(lo, hi, self.t0.max(other.t0), self.t1.min(other.t1)).ok()
    }

    /// Maps a point of the unit cube `[0,1]^{n+1}` into the box.
    pub fn map_unit(&self, u: &[f64]) -> SpaceTimePoint {
        let n = self.dim();
        let x = (0..n).map(|i| self.lo[i] + u[i] * (self.hi[i] - self.lo[i])).collect();
        SpaceTimePoint::new(x, self.t0 + u[n] * (self.t1 - self.t0))
    }
}

/// Orientation of the 1+1 dimensional cone removed by [`DomainSpec::Cone1d`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeOrientation {
    /// `{|t| < γx}`: opens towards positive `x`.
    Horizontal,
    /// `{|x| < γ|t|, t < 0}`: opens towards the past.
    Downward,
}

/// Serializable description of a domain. See [`make_domain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    /// `∏(lo_i, hi_i) × (t0, t1)`.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        t0: f64,
        t1: f64,
    },
    /// `G × (t0, t1)` with `G` an interval (two one-dimensional vertices) or
    /// a simple polygon (vertices in the plane).
    Cylinder {
        vertices: Vec<Vec<f64>>,
        #[serde(default)]
        t0: f64,
        t1: f64,
    },
    /// Open space-time ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// The open box `(lo, hi) × (t0, t1)` minus the closed ball `B̄(center, radius)`;
    /// `center` lists space coordinates followed by time.
    BallComplement {
        center: Vec<f64>,
        radius: f64,
        lo: Vec<f64>,
        hi: Vec<f64>,
        t0: f64,
        t1: f64,
    },
    /// `B(0,1) ∩ {t < 0}` minus a closed cone with vertex at the origin (n = 1).
    Cone1d { gamma: f64, orientation: ConeOrientation },
    /// `B(0,r)` minus the closed cone `{|(x,t)| ≤ θ x·v, t ≤ 0}`.
    HorizontalConeComplement { theta: f64, v: Vec<f64>, r: f64 },
    /// `{|x| < 1, -1 < t < 0, t > -θ|x|^l}`.
    NorthPole { theta: f64, l: f64, n: usize },
    /// `(|x|/(-t)^{1/λ})^{p/(p-1)} < K(-t)^{n(p-2)/λ} h(t)^{α(p-2)}`, `-1/(2e) < t < 0`.
    Petrovskii { k: f64, alpha: f64, p: f64, n: usize },
    /// `|x|^l < K(-t)`, `-1 < t < 0`.
    SingularFinal { k: f64, l: f64, p: f64, n: usize },
    /// `((p-2)/(pλ^{1/(p-1)}))(|x|/(-t)^{1/λ})^{p/(p-1)} < 1 - 2^{-(p-2)/(p-1)}`, `-T < t < 0`.
    BarenblattBall {
        p: f64,
        n: usize,
        #[serde(default = "default_barenblatt_span")]
        t_span: f64,
    },
    /// Intersection of the listed domains.
    Intersection { parts: Vec<DomainSpec> },
}

fn default_barenblatt_span() -> f64 {
    0.01
}

type Predicate = Arc<dyn Fn(&SpaceTimePoint) -> bool + Send + Sync>;

/// An open subset of `R^{n+1}` with a bounding box.
#[derive(Clone)]
pub struct DomainGeometry {
    n: usize,
    predicate: Predicate,
    bbox: SpaceTimeBox,
    label: String,
    spec: Option<DomainSpec>,
}

impl fmt::Debug for DomainGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainGeometry")
            .field("label", &self.label)
            .field("bbox", &self.bbox)
            .finish()
    }
}

impl DomainGeometry {
    /// A domain from an arbitrary membership predicate.
    pub fn from_predicate(
        bbox: SpaceTimeBox,
        label: impl Into<String>,
        predicate: impl Fn(&SpaceTimePoint) -> bool + Send + Sync + 'static,
    ) -> Self {
        DomainGeometry {
            n: bbox.dim(),
            predicate: Arc::new(predicate),
            bbox,
            label: label.into(),
            spec: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, z: &SpaceTimePoint) -> bool {
        z.dim() == self.n && self.bbox.contains_closed(z) && (self.predicate)(z)
    }

    pub fn bbox(&self) -> &SpaceTimeBox {
        &self.bbox
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn spec(&self) -> Option<&DomainSpec> {
        self.spec.as_ref()
    }

    /// The part of the domain inside `window` (bounding box shrunk accordingly).
    pub fn restricted(&self, window: &SpaceTimeBox) -> Result<DomainGeometry> {
        let bbox = self
            .bbox
            .intersect(window)
            .ok_or_else(|| Error::param("restriction window misses the domain"))?;
        let inner = self.clone();
        let w = window.clone();
        Ok(DomainGeometry::from_predicate(
            bbox,
            format!("{} restricted", self.label),
            move |z| w.contains_open(z) && inner.contains(z),
        ))
    }

    /// Intersection with another domain of the same dimension.
    pub fn intersect(&self, other: &DomainGeometry) -> Result<DomainGeometry> {
        if self.n != other.n {
            return Err(Error::param("cannot intersect domains of different dimension"));
        }
        let bbox = self
            .bbox
            .intersect(&other.bbox)
            .ok_or_else(|| Error::param("intersection is empty"))?;
        let (a, b) = (self.clone(), other.clone());
        Ok(DomainGeometry::from_predicate(
            bbox,
            format!("{} ∩ {}", self.label, other.label),
            move |z| a.contains(z) && b.contains(z),
        ))
    }
}

/// `h(t) = (|log(-t)|^{p-2} - 1)/(p-2)`, positive for `-1/e < t < 0` when `p > 2`.
pub fn petrovskii_h(p: f64, t: f64) -> f64 {
    ((-t).ln().abs().powf(p - 2.0) - 1.0) / (p - 2.0)
}

/// Lateral half-width `y(t)` of the Petrovskiĭ domain.
pub fn petrovskii_half_width(k: f64, alpha: f64, p: f64, n: usize, t: f64) -> f64 {
    let lam = n as f64 * (p - 2.0) + p;
    let rhs = k * (-t).powf(n as f64 * (p - 2.0) / lam) * petrovskii_h(p, t).powf(alpha * (p - 2.0));
    (-t).powf(1.0 / lam) * rhs.powf((p - 1.0) / p)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be > 0, got {v}")))
    }
}

/// Maximum of a positive function on `[a, b]`: uniform scan, then golden
/// refinement around the best sample.
fn scan_max(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let m: usize = 4000;
    let ds = (b - a) / m as f64;
    let (ibest, fbest) = (0..=m)
        .map(|i| (i, f(a + ds * i as f64)))
        .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let lo = a + ds * ibest.saturating_sub(1) as f64;
    let hi = (a + ds * (ibest + 1) as f64).min(b);
    let (_, fref) = crate::barriers::golden_max(&f, lo, hi, 1e-13);
    fbest.max(fref)
}

/// Builds the domain described by `spec`.
pub fn make_domain(spec: &DomainSpec) -> Result<DomainGeometry> {
    let mut dom = build(spec)?;
    dom.spec = Some(spec.clone());
    Ok(dom)
}

fn build(spec: &DomainSpec) -> Result<DomainGeometry> {
    match spec {
        DomainSpec::Box { lo, hi, t0, t1 } => {
            let bbox = SpaceTimeBox::new(lo.clone(), hi.clone(), *t0, *t1)?;
            let b = bbox.clone();
            Ok(DomainGeometry::from_predicate(bbox, "box", move |z| b.contains_open(z)))
        }
        DomainSpec::Cylinder { vertices, t0, t1 } => cylinder(vertices, *t0, *t1),
        DomainSpec::Ball { center, radius } => {
            check_positive("radius", *radius)?;
            if center.len() < 2 {
                return Err(Error::param("ball center needs space and time coordinates"));
            }
            let c = SpaceTimePoint::from_coords(center);
            let r = *radius;
            let bbox = SpaceTimeBox::new(
                c.x.iter().map(|a| a - r).collect(),
                c.x.iter().map(|a| a + r).collect(),
                c.t - r,
                c.t + r,
            )?;
            Ok(DomainGeometry::from_predicate(bbox, "ball", move |z| {
                z.distance(&c) < r
            }))
        }
        DomainSpec::BallComplement {
            center,
            radius,
            lo,
            hi,
            t0,
            t1,
        } => {
            check_positive("radius", *radius)?;
            if center.len() != lo.len() + 1 {
                return Err(Error::param("ball center must have n space coordinates and time"));
            }
            let bbox = SpaceTimeBox::new(lo.clone(), hi.clone(), *t0, *t1)?;
            let b = bbox.clone();
            let c = SpaceTimePoint::from_coords(center);
            let r = *radius;
            Ok(DomainGeometry::from_predicate(bbox, "ball complement", move |z| {
                b.contains_open(z) && z.distance(&c) > r
            }))
        }
        DomainSpec::Cone1d { gamma, orientation } => {
            check_positive("gamma", *gamma)?;
            let g = *gamma;
            let bbox = SpaceTimeBox::new(vec![-1.0], vec![1.0], -1.0, 0.0)?;
            let o = *orientation;
            Ok(DomainGeometry::from_predicate(bbox, "cone complement", move |z| {
                let (x, t) = (z.x[0], z.t);
                let in_ball = x * x + t * t < 1.0 && t < 0.0;
                let outside_cone = match o {
                    ConeOrientation::Horizontal => t.abs() > g * x,
                    ConeOrientation::Downward => x.abs() > g * t.abs(),
                };
                in_ball && outside_cone
            }))
        }
        DomainSpec::HorizontalConeComplement { theta, v, r } => {
            check_positive("theta", *theta)?;
            check_positive("r", *r)?;
            let nv = crate::field::norm(v);
            if (nv - 1.0).abs() > 1e-12 {
                return Err(Error::param("v must be a unit vector"));
            }
            let (th, v, r) = (*theta, v.clone(), *r);
            let n = v.len();
            let bbox = SpaceTimeBox::new(vec![-r; n], vec![r; n], -r, r)?;
            Ok(DomainGeometry::from_predicate(
                bbox,
                "horizontal cone complement",
                move |z| {
                    let norm = (z.x_norm().powi(2) + z.t * z.t).sqrt();
                    let xv: f64 = z.x.iter().zip(&v).map(|(a, b)| a * b).sum();
                    let in_cone = norm <= th * xv && z.t <= 0.0;
                    norm < r && !in_cone
                },
            ))
        }
        DomainSpec::NorthPole { theta, l, n } => {
            check_positive("theta", *theta)?;
            check_positive("l", *l)?;
            let (th, l, n) = (*theta, *l, *n);
            if n == 0 {
                return Err(Error::param("n must be at least 1"));
            }
            let bbox = SpaceTimeBox::new(vec![-1.0; n], vec![1.0; n], -th.min(1.0), 0.0)?;
            Ok(DomainGeometry::from_predicate(bbox, "north pole", move |z| {
                let r = z.x_norm();
                r < 1.0 && z.t < 0.0 && z.t > -1.0 && z.t > -th * r.powf(l)
            }))
        }
        DomainSpec::Petrovskii { k, alpha, p, n } => {
            if !(*p > 2.0) {
                return Err(Error::param(format!("petrovskii domain requires p > 2, got {p}")));
            }
            check_positive("K", *k)?;
            check_positive("alpha", *alpha)?;
            let (k, alpha, p, n) = (*k, *alpha, *p, *n);
            if n == 0 {
                return Err(Error::param("n must be at least 1"));
            }
            let lam = n as f64 * (p - 2.0) + p;
            let t_min = -1.0 / (2.0 * E);
            // Scan in s = log(-t) down to a very small time; y(t) → 0 as t → 0.
            let ymax = scan_max(-700.0, (-t_min).ln(), |s| {
                petrovskii_half_width(k, alpha, p, n, -s.exp())
            });
            let half = ymax * 1.001;
            let bbox = SpaceTimeBox::new(vec![-half; n], vec![half; n], t_min, 0.0)?;
            Ok(DomainGeometry::from_predicate(bbox, "petrovskii", move |z| {
                let t = z.t;
                if !(t > t_min && t < 0.0) {
                    return false;
                }
                let lhs = (z.x_norm() / (-t).powf(1.0 / lam)).powf(p / (p - 1.0));
                let rhs = k * (-t).powf(n as f64 * (p - 2.0) / lam) * petrovskii_h(p, t).powf(alpha * (p - 2.0));
                lhs < rhs
            }))
        }
        DomainSpec::SingularFinal { k, l, p, n } => {
            if !(*p > 1.0 && *p < 2.0) {
                return Err(Error::param(format!("singular_final requires 1 < p < 2, got {p}")));
            }
            if !(*l > 0.0 && *l < *p) {
                return Err(Error::param(format!("singular_final requires 0 < l < p, got l = {l}")));
            }
            check_positive("K", *k)?;
            let (k, l, n) = (*k, *l, *n);
            if n == 0 {
                return Err(Error::param("n must be at least 1"));
            }
            let half = k.powf(1.0 / l) * 1.001;
            let bbox = SpaceTimeBox::new(vec![-half; n], vec![half; n], -1.0, 0.0)?;
            Ok(DomainGeometry::from_predicate(bbox, "singular final", move |z| {
                z.t > -1.0 && z.t < 0.0 && z.x_norm().powf(l) < k * (-z.t)
            }))
        }
        DomainSpec::BarenblattBall { p, n, t_span } => {
            if !(*p > 2.0) {
                return Err(Error::param(format!("barenblatt_ball requires p > 2, got {p}")));
            }
            check_positive("T", *t_span)?;
            let (p, n, tt) = (*p, *n, *t_span);
            if n == 0 {
                return Err(Error::param("n must be at least 1"));
            }
            let lam = n as f64 * (p - 2.0) + p;
            let c = (p - 2.0) / (p * lam.powf(1.0 / (p - 1.0)));
            let b = 1.0 - 2f64.powf(-(p - 2.0) / (p - 1.0));
            let half = (b / c).powf((p - 1.0) / p) * tt.powf(1.0 / lam) * 1.001;
            let bbox = SpaceTimeBox::new(vec![-half; n], vec![half; n], -tt, 0.0)?;
            Ok(DomainGeometry::from_predicate(bbox, "barenblatt ball", move |z| {
                let t = z.t;
                t > -tt && t < 0.0 && c * (z.x_norm() / (-t).powf(1.0 / lam)).powf(p / (p - 1.0)) < b
            }))
        }
        DomainSpec::Intersection { parts } => {
            let mut it = parts.iter();
            let first = it.next().ok_or_else(|| Error::param("intersection of no domains"))?;
            let mut dom = make_domain(first)?;
            for s in it {
                dom = dom.intersect(&make_domain(s)?)?;
            }
            Ok(dom)
        }
    }
}

fn cylinder(vertices: &[Vec<f64>], t0: f64, t1: f64) -> Result<DomainGeometry> {
    let dim = vertices.first().map(|v| v.len()).unwrap_or(0);
    if vertices.iter().any(|v| v.len() != dim) {
        return Err(Error::param("cylinder vertices must share one dimension"));
    }
    match dim {
        1 if vertices.len() == 2 => {
            let a = vertices[0][0].min(vertices[1][0]);
            let b = vertices[0][0].max(vertices[1][0]);
            let bbox = SpaceTimeBox::new(vec![a], vec![b], t0, t1)?;
            let bb = bbox.clone();
            Ok(DomainGeometry::from_predicate(bbox, "cylinder", move |z| {
                bb.contains_open(z)
            }))
        }
        2 if vertices.len() >= 3 => {
            let poly: Vec<(f64, f64)> = vertices.iter().map(|v| (v[0], v[1])).collect();
            let lo = vec![
                poly.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
                poly.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            ];
            let hi = vec![
                poly.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
                poly.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
            ];
            let bbox = SpaceTimeBox::new(lo, hi, t0, t1)?;
            Ok(DomainGeometry::from_predicate(bbox, "cylinder", move |z| {
                z.t > t0 && z.t < t1 && polygon_interior(&poly, z.x[0], z.x[1])
            }))
        }
        _ => Err(Error::param(
            "cylinder base must be an interval (2 points in R) or a polygon (≥3 points in R²)",
        )),
    }
}

/// Strict interior of a simple polygon: points on an edge are outside.
fn polygon_interior(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let m = poly.len();
    let mut inside = false;
    for i in 0..m {
        let (x1, y1) = poly[i];
        let (x2, y2) = poly[(i + 1) % m];
        let cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1);
        let within = x >= x1.min(x2) && x <= x1.max(x2) && y >= y1.min(y2) && y <= y1.max(y2);
        if cross == 0.0 && within {
            return false;
        }
        if (y1 > y) != (y2 > y) {
            let xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1);
            if x < xc {
                inside = !inside;
            }
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, t: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(vec![x], t)
    }

    #[test]
    fn petrovskii_literal_inequality() {
        let d = make_domain(&DomainSpec::Petrovskii {
            k: 1.0,
            alpha: 1.0,
            p: 3.0,
            n: 1,
        })
        .unwrap();
        let (x, t): (f64, f64) = (0.01, -0.1);
        let lhs = (x / (-t).powf(0.25)).powf(1.5);
        let rhs = (-t).powf(0.25) * ((-t).ln().abs() - 1.0);
        assert_eq!(d.contains(&pt(x, t)), lhs < rhs);
        assert!(d.contains(&pt(x, t)));
        assert!(!d.contains(&pt(0.0, -0.2)), "t below -1/(2e)");
        assert!(!d.contains(&pt(0.0, 0.0)));
    }

    #[test]
    fn petrovskii_rejects_small_p() {
        assert!(make_domain(&DomainSpec::Petrovskii {
            k: 1.0,
            alpha: 1.0,
            p: 2.0,
            n: 1
        })
        .is_err());
    }

    #[test]
    fn singular_final_membership() {
        let d = make_domain(&DomainSpec::SingularFinal {
            k: 2.0,
            l: 1.0,
            p: 1.5,
            n: 1,
        })
        .unwrap();
        assert!(d.contains(&pt(0.1, -0.1)));
        assert!(!d.contains(&pt(0.3, -0.1)));
        assert!(make_domain(&DomainSpec::SingularFinal {
            k: 2.0,
            l: 1.6,
            p: 1.5,
            n: 1
        })
        .is_err());
        assert!(make_domain(&DomainSpec::SingularFinal {
            k: 2.0,
            l: 1.0,
            p: 2.5,
            n: 1
        })
        .is_err());
    }

    #[test]
    fn cone_membership() {
        let d = make_domain(&DomainSpec::Cone1d {
            gamma: 1.0,
            orientation: ConeOrientation::Horizontal,
        })
        .unwrap();
        assert!(!d.contains(&pt(1.0, 0.5)));
        assert!(!d.contains(&pt(0.5, -0.2)), "inside the cone |t| < x");
        assert!(d.contains(&pt(0.1, -0.5)));
        assert!(d.contains(&pt(-0.5, -0.1)));
        let down = make_domain(&DomainSpec::Cone1d {
            gamma: 1.0,
            orientation: ConeOrientation::Downward,
        })
        .unwrap();
        assert!(!down.contains(&pt(0.1, -0.5)));
        assert!(down.contains(&pt(0.5, -0.1)));
    }

    #[test]
    fn barenblatt_ball_shape() {
        let d = make_domain(&DomainSpec::BarenblattBall {
            p: 3.0,
            n: 1,
            t_span: 0.01,
        })
        .unwrap();
        // Half-width (6(1 - 2^{-1/2}))^{2/3} (-t)^{1/4} for p = 3.
        let w = (6.0 * (1.0 - 0.5f64.sqrt())).powf(2.0 / 3.0) * 0.005f64.powf(0.25);
        assert!(d.contains(&pt(0.999 * w, -0.005)));
        assert!(!d.contains(&pt(1.001 * w, -0.005)));
        assert!(!d.contains(&pt(0.0, -0.011)));
        let hw = d.bbox().hi[0];
        let exact = (6.0 * (1.0 - 0.5f64.sqrt())).powf(2.0 / 3.0) * 0.01f64.powf(0.25);
        assert!(hw >= exact && hw <= 1.01 * exact);
        assert!(make_domain(&DomainSpec::BarenblattBall {
            p: 1.5,
            n: 1,
            t_span: 0.01
        })
        .is_err());
    }

    #[test]
    fn petrovskii_bbox_is_tight() {
        let d = make_domain(&DomainSpec::Petrovskii {
            k: 1.0,
            alpha: 1.0,
            p: 3.0,
            n: 1,
        })
        .unwrap();
        let hw = d.bbox().hi[0];
        // Independent dense scan in t.
        let mut best: f64 = 0.0;
        for i in 1..200_000 {
            let t = -(i as f64) / 200_000.0 / (2.0 * E);
            best = best.max(petrovskii_half_width(1.0, 1.0, 3.0, 1, t));
        }
        assert!(hw >= best && hw <= 1.01 * best, "{hw} vs {best}");
    }

    #[test]
    fn polygon_cylinder() {
        let d = make_domain(&DomainSpec::Cylinder {
            vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            t0: 0.0,
            t1: 1.0,
        })
        .unwrap();
        assert!(d.contains(&SpaceTimePoint::new(vec![0.2, 0.2], 0.5)));
        assert!(!d.contains(&SpaceTimePoint::new(vec![0.6, 0.6], 0.5)));
        assert!(!d.contains(&SpaceTimePoint::new(vec![0.5, 0.0], 0.5)));
    }

    #[test]
    fn horizontal_cone_complement() {
        let d = make_domain(&DomainSpec::HorizontalConeComplement {
            theta: 2.0,
            v: vec![1.0],
            r: 1.0,
        })
        .unwrap();
        assert!(!d.contains(&pt(0.5, -0.1)));
        assert!(d.contains(&pt(0.5, 0.1)));
        assert!(d.contains(&pt(-0.5, -0.1)));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = DomainSpec::Petrovskii {
            k: 1.0,
            alpha: 1.0,
            p: 3.0,
            n: 1,
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"kind\":\"petrovskii\""));
        let back: DomainSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
    }

    proptest::proptest! {
        #[test]
        fn contains_false_outside_bbox(x in -3.0f64..3.0, t in -1.5f64..0.5) {
            let specs = [
                DomainSpec::Petrovskii { k: 1.0, alpha: 1.0, p: 3.0, n: 1 },
                DomainSpec::SingularFinal { k: 2.0, l: 1.0, p: 1.5, n: 1 },
                DomainSpec::BarenblattBall { p: 3.0, n: 1, t_span: 0.01 },
                DomainSpec::Cone1d { gamma: 1.0, orientation: ConeOrientation::Horizontal },
                DomainSpec::NorthPole { theta: 1.0, l: 4.0, n: 1 },
            ];
            let z = pt(x, t);
            for s in &specs {
                let d = make_domain(s).unwrap();
                if d.contains(&z) {
                    proptest::prop_assert!(d.bbox().contains_closed(&z));
                }
            }
        }
    }
}

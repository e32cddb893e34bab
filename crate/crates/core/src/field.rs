//! Space-time points and scalar fields with optional closed-form derivatives.
//!
//! Missing derivatives are synthesized by finite differences. Stencils switch
//! to one-sided second-order formulas when the central stencil would leave the
//! field's domain of validity.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;

/// A point `(x, t)` with `x ∈ Rⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: Vec<f64>,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        SpaceTimePoint { x, t }
    }

    pub fn origin(n: usize) -> Self {
        SpaceTimePoint {
            x: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Coordinates `(x₁, …, xₙ, t)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.x.clone();
        c.push(self.t);
        c
    }

    /// Inverse of [`coords`](Self::coords): the last entry is time.
    pub fn from_coords(c: &[f64]) -> Self {
        let (t, x) = c.split_last().expect("at least the time coordinate");
        SpaceTimePoint { x: x.to_vec(), t: *t }
    }

    /// Coordinate `axis`, where `axis == n` is time.
    pub fn coord(&self, axis: usize) -> f64 {
        if axis == self.x.len() {
            self.t
        } else {
            self.x[axis]
        }
    }

    pub fn shifted(&self, axis: usize, delta: f64) -> Self {
        let mut z = self.clone();
        if axis == z.x.len() {
            z.t += delta;
        } else {
            z.x[axis] += delta;
        }
        z
    }

    pub fn distance(&self, other: &SpaceTimePoint) -> f64 {
        let dx: f64 = self.x.iter().zip(&other.x).map(|(a, b)| (a - b) * (a - b)).sum();
        (dx + (self.t - other.t).powi(2)).sqrt()
    }

    pub fn x_norm(&self) -> f64 {
        norm(&self.x)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub type ValueFn = Arc<dyn Fn(&SpaceTimePoint) -> f64 + Send + Sync>;

/// A derivative that may be unavailable at some points (returns `None`
/// there, and the field falls back to finite differences).
pub type PartialFn<T> = Arc<dyn Fn(&SpaceTimePoint) -> Option<T> + Send + Sync>;

/// Optional closed-form derivatives. The Hessian is stored row-major.
#[derive(Clone, Default)]
pub struct Derivatives {
    pub dt: Option<PartialFn<f64>>,
    pub grad: Option<PartialFn<Vec<f64>>>,
    pub hessian: Option<PartialFn<Vec<f64>>>,
    pub p_laplacian: Option<PartialFn<f64>>,
}

impl Derivatives {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dt(mut self, f: impl Fn(&SpaceTimePoint) -> f64 + Send + Sync + 'static) -> Self {
        self.dt = Some(Arc::new(move |z| Some(f(z))));
        self
    }

    pub fn with_grad(mut self, f: impl Fn(&SpaceTimePoint) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(move |z| Some(f(z))));
        self
    }

    pub fn with_hessian(mut self, f: impl Fn(&SpaceTimePoint) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(move |z| Some(f(z))));
        self
    }

    /// Closed-form `Δ_p u`; only valid for the exponent the field was built for.
    pub fn with_p_laplacian(mut self, f: impl Fn(&SpaceTimePoint) -> f64 + Send + Sync + 'static) -> Self {
        self.p_laplacian = Some(Arc::new(move |z| Some(f(z))));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.dt.is_none() && self.grad.is_none() && self.hessian.is_none() && self.p_laplacian.is_none()
    }
}

/// Default finite-difference step for a coordinate value.
pub fn default_step(coord: f64) -> f64 {
    (1e-5 * coord.abs()).max(1e-5)
}

/// A scalar function of `(x, t)` with optional closed-form derivatives.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    value: ValueFn,
    derivs: Derivatives,
    fd_step: Option<f64>,
    domain: Option<Arc<DomainGeometry>>,
    label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("closed_dt", &self.derivs.dt.is_some())
            .field("closed_grad", &self.derivs.grad.is_some())
            .field("closed_hessian", &self.derivs.hessian.is_some())
            .field("closed_p_laplacian", &self.derivs.p_laplacian.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(dim: usize, value: impl Fn(&SpaceTimePoint) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            dim,
            value: Arc::new(value),
            derivs: Derivatives::default(),
            fd_step: None,
            domain: None,
            label: String::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        ScalarField::new(dim, move |_| c)
            .with_derivatives(
                Derivatives::new()
                    .with_dt(|_| 0.0)
                    .with_grad(move |_| vec![0.0; dim])
                    .with_hessian(move |_| vec![0.0; dim * dim])
                    .with_p_laplacian(|_| 0.0),
            )
            .with_label(format!("constant {c}"))
    }

    pub fn with_derivatives(mut self, derivs: Derivatives) -> Self {
        self.derivs = derivs;
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = Some(step);
        self
    }

    pub fn with_domain(mut self, domain: DomainGeometry) -> Self {
        self.domain = Some(Arc::new(domain));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Option<&DomainGeometry> {
        self.domain.as_deref()
    }

    pub fn derivatives(&self) -> &Derivatives {
        &self.derivs
    }

    pub fn value(&self, z: &SpaceTimePoint) -> f64 {
        (self.value)(z)
    }

    pub fn value_fn(&self) -> ValueFn {
        self.value.clone()
    }

    /// The same value function with every closed-form derivative removed.
    pub fn without_derivatives(&self) -> Self {
        ScalarField {
            derivs: Derivatives::default(),
            ..self.clone()
        }
    }

    /// `-u`, keeping closed forms (`Δ_p` is odd in `u`).
    pub fn negated(&self) -> Self {
        let v = self.value.clone();
        let d = &self.derivs;
        let derivs = Derivatives {
            dt: d
                .dt
                .clone()
                .map(|f| -> PartialFn<f64> { Arc::new(move |z| f(z).map(|a| -a)) }),
            grad: d.grad.clone().map(|f| -> PartialFn<Vec<f64>> {
                Arc::new(move |z| f(z).map(|g| g.into_iter().map(|a| -a).collect()))
            }),
            hessian: d.hessian.clone().map(|f| -> PartialFn<Vec<f64>> {
                Arc::new(move |z| f(z).map(|g| g.into_iter().map(|a| -a).collect()))
            }),
            p_laplacian: d
                .p_laplacian
                .clone()
                .map(|f| -> PartialFn<f64> { Arc::new(move |z| f(z).map(|a| -a)) }),
        };
        ScalarField {
            dim: self.dim,
            value: Arc::new(move |z| -v(z)),
            derivs,
            fd_step: self.fd_step,
            domain: self.domain.clone(),
            label: format!("-({})", self.label),
        }
    }

    pub fn closed_dt(&self, z: &SpaceTimePoint) -> Option<f64> {
        self.derivs.dt.as_ref().and_then(|f| f(z))
    }

    pub fn closed_grad(&self, z: &SpaceTimePoint) -> Option<Vec<f64>> {
        self.derivs.grad.as_ref().and_then(|f| f(z))
    }

    pub fn closed_hessian(&self, z: &SpaceTimePoint) -> Option<Vec<f64>> {
        self.derivs.hessian.as_ref().and_then(|f| f(z))
    }

    pub fn closed_p_laplacian(&self, z: &SpaceTimePoint) -> Option<f64> {
        self.derivs.p_laplacian.as_ref().and_then(|f| f(z))
    }

    fn step_for(&self, z: &SpaceTimePoint, axis: usize) -> f64 {
        self.fd_step.unwrap_or_else(|| default_step(z.coord(axis)))
    }

    /// `∂ₜu`, closed form when available.
    pub fn dt(&self, z: &SpaceTimePoint) -> f64 {
        self.closed_dt(z)
            .unwrap_or_else(|| self.fd_dt(z, self.step_for(z, self.dim)))
    }

    pub fn grad(&self, z: &SpaceTimePoint) -> Vec<f64> {
        if let Some(g) = self.closed_grad(z) {
            return g;
        }
        (0..self.dim)
            .map(|i| self.fd_first(z, i, self.step_for(z, i)))
            .collect()
    }

    pub fn hessian(&self, z: &SpaceTimePoint) -> Vec<f64> {
        if let Some(h) = self.closed_hessian(z) {
            return h;
        }
        let steps: Vec<f64> = (0..self.dim).map(|i| self.step_for(z, i)).collect();
        self.fd_hessian_steps(z, &steps)
    }

    pub fn fd_dt(&self, z: &SpaceTimePoint, step: f64) -> f64 {
        self.fd_first(z, self.dim, step)
    }

    pub fn fd_grad(&self, z: &SpaceTimePoint, step: f64) -> Vec<f64> {
        (0..self.dim).map(|i| self.fd_first(z, i, step)).collect()
    }

    pub fn fd_hessian(&self, z: &SpaceTimePoint, step: f64) -> Vec<f64> {
        self.fd_hessian_steps(z, &vec![step; self.dim])
    }

    fn inside(&self, z: &SpaceTimePoint) -> bool {
        self.domain.as_ref().is_none_or(|d| d.contains(z))
    }

    fn stencil(&self, z: &SpaceTimePoint, axis: usize, h: f64) -> Stencil {
        if self.domain.is_none() || (self.inside(&z.shifted(axis, h)) && self.inside(&z.shifted(axis, -h))) {
            Stencil::Central
        } else if self.inside(&z.shifted(axis, h)) && self.inside(&z.shifted(axis, 2.0 * h)) {
            Stencil::Forward
        } else if self.inside(&z.shifted(axis, -h)) && self.inside(&z.shifted(axis, -2.0 * h)) {
            Stencil::Backward
        } else {
            Stencil::Central
        }
    }

    fn fd_first(&self, z: &SpaceTimePoint, axis: usize, h: f64) -> f64 {
        let st = self.stencil(z, axis, h);
        st.first(h)
            .iter()
            .map(|&(k, w)| w * self.value(&z.shifted(axis, k as f64 * h)))
            .sum()
    }

    fn fd_hessian_steps(&self, z: &SpaceTimePoint, steps: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let stencils: Vec<Stencil> = (0..n).map(|i| self.stencil(z, i, steps[i])).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            let hi = steps[i];
            hess[i * n + i] = stencils[i]
                .second(hi)
                .iter()
                .map(|&(k, w)| w * self.value(&z.shifted(i, k as f64 * hi)))
                .sum();
            for j in (i + 1)..n {
                let hj = steps[j];
                let mut acc = 0.0;
                for &(ki, wi) in &stencils[i].first(hi) {
                    let zi = z.shifted(i, ki as f64 * hi);
                    for &(kj, wj) in &stencils[j].first(hj) {
                        acc += wi * wj * self.value(&zi.shifted(j, kj as f64 * hj));
                    }
                }
                hess[i * n + j] = acc;
                hess[j * n + i] = acc;
            }
        }
        hess
    }
}

#[derive(Debug, Clone, Copy)]
enum Stencil {
    Central,
    Forward,
    Backward,
}

impl Stencil {
    fn first(self, h: f64) -> Vec<(i32, f64)> {
        match self {
            Stencil::Central => vec![(-1, -0.5 / h), (1, 0.5 / h)],
            Stencil::Forward => vec![(0, -1.5 / h), (1, 2.0 / h), (2, -0.5 / h)],
            Stencil::Backward => vec![(0, 1.5 / h), (-1, -2.0 / h), (-2, 0.5 / h)],
        }
    }

    fn second(self, h: f64) -> Vec<(i32, f64)> {
        let h2 = h * h;
        match self {
            Stencil::Central => vec![(-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2)],
            Stencil::Forward => vec![(0, 2.0 / h2), (1, -5.0 / h2), (2, 4.0 / h2), (3, -1.0 / h2)],
            Stencil::Backward => {
                vec![(0, 2.0 / h2), (-1, -5.0 / h2), (-2, 4.0 / h2), (-3, -1.0 / h2)]
            }
        }
    }
}

/// Builds a field from a value closure and optional closed-form derivatives.
///
/// Derivatives that are not supplied are synthesized by finite differences
/// with `step` (or the coordinate-relative default when `None`). The value is
/// evaluated at every probe point and non-finite results are rejected.
pub fn field_from_closure(
    dim: usize,
    value_fn: impl Fn(&SpaceTimePoint) -> f64 + Send + Sync + 'static,
    derivatives: Option<Derivatives>,
    step: Option<f64>,
    probe_points: &[SpaceTimePoint],
) -> Result<ScalarField> {
    if let Some(h) = step {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::param(format!("finite-difference step must be > 0, got {h}")));
        }
    }
    let mut field = ScalarField::new(dim, value_fn);
    if let Some(d) = derivatives {
        field = field.with_derivatives(d);
    }
    if let Some(h) = step {
        field = field.with_fd_step(h);
    }
    for z in probe_points {
        if z.dim() != dim {
            return Err(Error::param(format!(
                "probe point has {} space coordinates, field expects {dim}",
                z.dim()
            )));
        }
        let v = field.value(z);
        if !v.is_finite() {
            return Err(Error::numerical(format!("value {v} at probe point {z:?}")));
        }
    }
    Ok(field)
}

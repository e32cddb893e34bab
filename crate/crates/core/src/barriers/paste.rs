use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Derivatives, PartialFn, ScalarField, SpaceTimePoint};
use crate::geometry::{sample_domain, DomainGeometry, SpaceTimeBox};

/// Membership predicate of the pasting region `G`.
pub type Region = Arc<dyn Fn(&SpaceTimePoint) -> bool + Send + Sync>;

/// Settings for [`paste_min`].
#[derive(Debug, Clone, PartialEq)]
pub struct PasteOptions {
    /// Number of inside/outside pairs used by the continuity check.
    pub samples: usize,
    /// Relative jump tolerance, scaled by `max(|u|, 1)`.
    pub rel_tol: f64,
    /// Closed-form derivatives are dropped when a neighbour this far away
    /// along any axis uses the other branch. Defaults to `1e-6` of the bbox
    /// diameter of `Θ`.
    pub collar: Option<f64>,
    pub seed: u64,
}

impl Default for PasteOptions {
    fn default() -> Self {
        PasteOptions {
            samples: 1000,
            rel_tol: 1e-9,
            collar: None,
            seed: 0x5eed,
        }
    }
}

/// Largest value jump across `∂G ∩ Θ` found by sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceJump {
    pub magnitude: f64,
    /// `magnitude / max(|u|, 1)` at the worst crossing.
    pub relative: f64,
    pub location: SpaceTimePoint,
    pub crossings: usize,
}

/// `Some(branch)` where the inner/outer choice is stable, `None` near the interface.
type Selector = Arc<dyn Fn(&SpaceTimePoint) -> Option<bool> + Send + Sync>;

/// Pasted field without the continuity check: `min{outer, inner}` in `G`,
/// `outer` elsewhere.
pub fn paste_min_unchecked(outer: &ScalarField, inner: &ScalarField, region: Region, collar: f64) -> ScalarField {
    let dim = outer.dim();
    let (uo, ui, g) = (outer.value_fn(), inner.value_fn(), region.clone());
    let inner_branch: Arc<dyn Fn(&SpaceTimePoint) -> bool + Send + Sync> = Arc::new(move |z| g(z) && ui(z) < uo(z));
    let (uo, ui, br) = (outer.value_fn(), inner.value_fn(), inner_branch.clone());
    let value = move |z: &SpaceTimePoint| if br(z) { ui(z) } else { uo(z) };

    // The branch is stable at `z` when every axis neighbour at `collar`
    // selects the same piece.
    let br = inner_branch;
    let select: Selector = Arc::new(move |z| {
        let b = br(z);
        for axis in 0..=dim {
            for s in [-collar, collar] {
                if br(&z.shifted(axis, s)) != b {
                    return None;
                }
            }
        }
        Some(b)
    });

    fn pick<T: 'static>(
        select: &Selector,
        outer: Option<PartialFn<T>>,
        inner: Option<PartialFn<T>>,
    ) -> Option<PartialFn<T>> {
        if outer.is_none() && inner.is_none() {
            return None;
        }
        let select = select.clone();
        Some(Arc::new(move |z| match select(z)? {
            true => inner.as_ref().and_then(|f| f(z)),
            false => outer.as_ref().and_then(|f| f(z)),
        }))
    }

    let (od, id) = (outer.derivatives(), inner.derivatives());
    let derivs = Derivatives {
        dt: pick(&select, od.dt.clone(), id.dt.clone()),
        grad: pick(&select, od.grad.clone(), id.grad.clone()),
        hessian: pick(&select, od.hessian.clone(), id.hessian.clone()),
        p_laplacian: pick(&select, od.p_laplacian.clone(), id.p_laplacian.clone()),
    };
    let mut f = ScalarField::new(dim, value)
        .with_derivatives(derivs)
        .with_label(format!("min{{{}, {}}} pasted", outer.label(), inner.label()));
    if let Some(d) = outer.domain() {
        f = f.with_domain(d.clone());
    }
    f
}

/// Samples crossings of `∂G ∩ Θ` and reports the largest jump of the pasted
/// value. `region_bbox` bounds `G ∩ Θ` and focuses the sampling; outside
/// points are drawn from three times that box.
pub fn interface_jump(
    outer: &ScalarField,
    inner: &ScalarField,
    region: &Region,
    region_bbox: &SpaceTimeBox,
    theta: &DomainGeometry,
    opts: &PasteOptions,
) -> Result<Option<InterfaceJump>> {
    let inside_dom = theta.restricted(region_bbox)?;
    let n = theta.n();
    let grow = |lo: f64, hi: f64| {
        let (c, w) = (0.5 * (lo + hi), 1.5 * (hi - lo));
        (c - w, c + w)
    };
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = grow(region_bbox.lo[i], region_bbox.hi[i]);
        lo.push(a);
        hi.push(b);
    }
    let (t0, t1) = grow(region_bbox.t0, region_bbox.t1);
    let outside_dom = theta.restricted(&SpaceTimeBox::new(lo, hi, t0, t1)?)?;

    let ins = sample_domain(&inside_dom, opts.samples, opts.seed, |z| region(z));
    let outs = sample_domain(&outside_dom, opts.samples, opts.seed ^ 0x9e37_79b9, |z| !region(z));
    let paste = |z: &SpaceTimePoint| {
        let o = outer.value(z);
        if region(z) {
            o.min(inner.value(z))
        } else {
            o
        }
    };

    let mut worst: Option<InterfaceJump> = None;
    let mut crossings = 0;
    for (a, b) in ins.iter().zip(&outs) {
        let (mut za, mut zb) = (a.coords(), b.coords());
        for _ in 0..80 {
            let mid: Vec<f64> = za.iter().zip(&zb).map(|(p, q)| 0.5 * (p + q)).collect();
            if region(&SpaceTimePoint::from_coords(&mid)) {
                za = mid;
            } else {
                zb = mid;
            }
        }
        let (pa, pb) = (SpaceTimePoint::from_coords(&za), SpaceTimePoint::from_coords(&zb));
        if !(theta.contains(&pa) && theta.contains(&pb)) {
            continue;
        }
        crossings += 1;
        let (va, vb) = (paste(&pa), paste(&pb));
        if !(va.is_finite() && vb.is_finite()) {
            return Err(Error::numerical(format!("non-finite pasted value near {pa:?}")));
        }
        let magnitude = (va - vb).abs();
        let relative = magnitude / va.abs().max(vb.abs()).max(1.0);
        if worst.as_ref().is_none_or(|w| relative > w.relative) {
            worst = Some(InterfaceJump {
                magnitude,
                relative,
                location: pa,
                crossings: 0,
            });
        }
    }
    Ok(worst.map(|w| InterfaceJump { crossings, ..w }))
}

/// `min{outer, inner}` in `G`, `outer` in `Θ \ G`, after checking continuity
/// across `∂G ∩ Θ`.
pub fn paste_min(
    outer: &ScalarField,
    inner: &ScalarField,
    region: Region,
    region_bbox: &SpaceTimeBox,
    theta: &DomainGeometry,
    opts: &PasteOptions,
) -> Result<ScalarField> {
    if let Some(j) = interface_jump(outer, inner, &region, region_bbox, theta, opts)? {
        if j.relative > opts.rel_tol {
            return Err(Error::Discontinuous {
                magnitude: j.magnitude,
                location: j.location.coords(),
            });
        }
    }
    let collar = opts.collar.unwrap_or(1e-6 * theta.bbox().diameter());
    Ok(paste_min_unchecked(outer, inner, region, collar))
}

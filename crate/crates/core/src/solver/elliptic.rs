use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::scheme::{flux, flux_derivative};
use crate::error::{Error, Result};
use crate::field::{Derivatives, ScalarField, SpaceTimePoint};
use crate::geometry::{DomainGeometry, SpaceTimeBox};
use crate::params::PParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticOptions {
    /// Cells per subinterval.
    pub cells: usize,
    /// Flux regularization; the grid spacing when absent.
    pub delta: Option<f64>,
    /// Stop when `max |F| ≤ tol · max(1, j, max |Φ_δ|/h)`, the last term being
    /// the roundoff floor of the flux differences.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EllipticOptions {
    fn default() -> Self {
        EllipticOptions {
            cells: 200,
            delta: None,
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Discrete solution of `Δ_p u = θ min{u'ζ, 0} − j` on `(−r₀, 0) ∪ (0, r₀)`
/// with `u = j|x|` at `−r₀, 0, r₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticAux {
    pub params: PParams,
    pub theta: f64,
    pub zeta: f64,
    pub j: f64,
    pub r0: f64,
    pub h: f64,
    pub delta: f64,
    /// Nodal values on `−r₀ + i h`, `i = 0..=cells`.
    pub left: Vec<f64>,
    /// Nodal values on `i h`, `i = 0..=cells`.
    pub right: Vec<f64>,
    /// Max-norm residual of the discrete system per Newton iteration, per side.
    pub history: [Vec<f64>; 2],
}

struct Side<'a> {
    nodes: &'a [f64],
    x0: f64,
}

impl EllipticAux {
    fn side(&self, y: f64) -> Side<'_> {
        if y < 0.0 {
            Side {
                nodes: &self.left,
                x0: -self.r0,
            }
        } else {
            Side {
                nodes: &self.right,
                x0: 0.0,
            }
        }
    }

    fn locate(&self, y: f64) -> (Side<'_>, usize, f64) {
        let s = self.side(y);
        let last = s.nodes.len() - 1;
        let q = ((y - s.x0) / self.h).clamp(0.0, last as f64);
        let i = (q.floor() as usize).min(last - 1);
        (s, i, q - i as f64)
    }

    fn slope(&self, nodes: &[f64], i: usize) -> f64 {
        let last = nodes.len() - 1;
        match i {
            0 => (nodes[1] - nodes[0]) / self.h,
            i if i == last => (nodes[last] - nodes[last - 1]) / self.h,
            i => (nodes[i + 1] - nodes[i - 1]) / (2.0 * self.h),
        }
    }

    /// Discrete `Δ_p` at an interior node.
    fn discrete_plap(&self, nodes: &[f64], i: usize) -> f64 {
        let (p, d2, h) = (self.params.p, self.delta * self.delta, self.h);
        let i = i.clamp(1, nodes.len() - 2);
        let sp = (nodes[i + 1] - nodes[i]) / h;
        let sm = (nodes[i] - nodes[i - 1]) / h;
        (flux(p, d2, sp, sp * sp) - flux(p, d2, sm, sm * sm)) / h
    }

    /// Piecewise linear interpolant of the nodal values.
    pub fn u(&self, y: f64) -> f64 {
        let (s, i, w) = self.locate(y);
        (1.0 - w) * s.nodes[i] + w * s.nodes[i + 1]
    }

    /// Interpolated central differences.
    pub fn du(&self, y: f64) -> f64 {
        let (s, i, w) = self.locate(y);
        (1.0 - w) * self.slope(s.nodes, i) + w * self.slope(s.nodes, i + 1)
    }

    /// Interpolated discrete p-Laplacian (interior nodes).
    pub fn plap(&self, y: f64) -> f64 {
        let (s, i, w) = self.locate(y);
        (1.0 - w) * self.discrete_plap(s.nodes, i) + w * self.discrete_plap(s.nodes, i + 1)
    }

    /// `v(x, t) = u(x − η(−t)ζ) − j t` on `−t_span < t < 0`, with closed time
    /// derivative and p-Laplacian taken from the interpolated discrete
    /// solution. The domain keeps `x − η(−t)ζ` one cell away from `{−r₀, 0, r₀}`.
    pub fn transform(
        &self,
        eta: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eta_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        t_span: f64,
    ) -> Result<(ScalarField, DomainGeometry)> {
        if !(t_span > 0.0 && t_span.is_finite()) {
            return Err(Error::param(format!("time span must be > 0, got {t_span}")));
        }
        let me = Arc::new(self.clone());
        let eta = Arc::new(eta);
        let eta_prime = Arc::new(eta_prime);
        let zeta = self.zeta;
        let shift = {
            let eta = eta.clone();
            move |z: &SpaceTimePoint| z.x[0] - eta(-z.t) * zeta
        };
        let (a, b, c) = (me.clone(), me.clone(), me.clone());
        let (s1, s2, s3, s4) = (shift.clone(), shift.clone(), shift.clone(), shift.clone());
        let j = self.j;
        let field = ScalarField::new(1, move |z| a.u(s1(z)) - j * z.t)
            .with_derivatives(
                Derivatives::new()
                    .with_dt(move |z| b.du(s2(z)) * zeta * eta_prime(-z.t) - j)
                    .with_grad({
                        let m = me.clone();
                        move |z| vec![m.du(s3(z))]
                    })
                    .with_p_laplacian(move |z| c.plap(s4(z))),
            )
            .with_label(format!("elliptic transform j={j}"));
        let (r0, h) = (self.r0, self.h);
        let reach = (0..=64)
            .map(|i| eta(t_span * i as f64 / 64.0).abs())
            .fold(0.0, f64::max);
        let bbox = SpaceTimeBox::new(vec![-r0 - reach], vec![r0 + reach], -t_span, 0.0)?;
        let domain = DomainGeometry::from_predicate(bbox, "elliptic transform domain", move |z| {
            if !(z.t > -t_span && z.t < 0.0) {
                return false;
            }
            let y = shift(z).abs();
            y > h && y < r0 - h
        });
        Ok((field, domain))
    }
}

/// Solves the auxiliary two-point problem on each subinterval by damped
/// semismooth Newton on the finite-difference system with flux `Φ_δ`.
pub fn solve_elliptic_aux_1d(
    params: &PParams,
    theta: f64,
    zeta: f64,
    j: f64,
    r0: f64,
    opts: &EllipticOptions,
) -> Result<EllipticAux> {
    params.validate()?;
    if params.n != 1 {
        return Err(Error::param(format!(
            "the auxiliary problem needs n = 1, got {}",
            params.n
        )));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::param(format!("θ must be > 0, got {theta}")));
    }
    if zeta != 1.0 && zeta != -1.0 {
        return Err(Error::param(format!("ζ must be ±1, got {zeta}")));
    }
    if !(j >= 0.0 && j.is_finite() && r0 > 0.0 && r0.is_finite()) {
        return Err(Error::param(format!("need j ≥ 0 and r₀ > 0, got j = {j}, r₀ = {r0}")));
    }
    if opts.cells < 2 {
        return Err(Error::param("need at least 2 cells per subinterval"));
    }
    let h = r0 / opts.cells as f64;
    let delta = opts.delta.unwrap_or(h);
    if !(delta > 0.0) {
        return Err(Error::param(format!("δ must be > 0, got {delta}")));
    }
    let sys = System {
        p: params.p,
        d2: delta * delta,
        h,
        theta,
        zeta,
        j,
    };
    let f = |x: f64| j * x.abs();
    let mut out = [Vec::new(), Vec::new()];
    let mut history = [Vec::new(), Vec::new()];
    for (side, x0) in [-r0, 0.0].into_iter().enumerate() {
        let init: Vec<f64> = (0..=opts.cells).map(|i| f(x0 + i as f64 * h)).collect();
        let (u, hist) = sys.newton(init, opts)?;
        out[side] = u;
        history[side] = hist;
    }
    let [left, right] = out;
    Ok(EllipticAux {
        params: *params,
        theta,
        zeta,
        j,
        r0,
        h,
        delta,
        left,
        right,
        history,
    })
}

struct System {
    p: f64,
    d2: f64,
    h: f64,
    theta: f64,
    zeta: f64,
    j: f64,
}

impl System {
    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let h = self.h;
        (1..u.len() - 1)
            .map(|i| {
                let sp = (u[i + 1] - u[i]) / h;
                let sm = (u[i] - u[i - 1]) / h;
                let q = self.zeta * (u[i + 1] - u[i - 1]) / (2.0 * h);
                (flux(self.p, self.d2, sp, sp * sp) - flux(self.p, self.d2, sm, sm * sm)) / h - self.theta * q.min(0.0)
                    + self.j
            })
            .collect()
    }

    fn norm(r: &[f64]) -> f64 {
        r.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn newton(&self, mut u: Vec<f64>, opts: &EllipticOptions) -> Result<(Vec<f64>, Vec<f64>)> {
        let h = self.h;
        let m = u.len() - 2;
        let mut r = self.residual(&u);
        let flux_scale = u
            .windows(2)
            .map(|w| {
                let s = (w[1] - w[0]) / h;
                flux(self.p, self.d2, s, s * s).abs()
            })
            .fold(0.0, f64::max);
        let target = opts.tol * self.j.max(1.0).max(flux_scale / h);
        let mut hist = vec![Self::norm(&r)];
        for _ in 0..opts.max_iter {
            if *hist.last().unwrap() <= target {
                return Ok((u, hist));
            }
            // Tridiagonal Jacobian: sub, diag, sup.
            let mut sub = vec![0.0; m];
            let mut diag = vec![0.0; m];
            let mut sup = vec![0.0; m];
            for k in 0..m {
                let i = k + 1;
                let sp = (u[i + 1] - u[i]) / h;
                let sm = (u[i] - u[i - 1]) / h;
                let dp = flux_derivative(self.p, self.d2, sp * sp) / (h * h);
                let dm = flux_derivative(self.p, self.d2, sm * sm) / (h * h);
                let q = self.zeta * (u[i + 1] - u[i - 1]) / (2.0 * h);
                let chi = if q < 0.0 {
                    self.theta * self.zeta / (2.0 * h)
                } else {
                    0.0
                };
                sub[k] = dm + chi;
                diag[k] = -(dp + dm);
                sup[k] = dp - chi;
            }
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let du = thomas(&sub, &diag, &sup, &rhs)?;
            let f0 = *hist.last().unwrap();
            let mut lambda = 1.0;
            loop {
                let trial: Vec<f64> = u
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        if i == 0 || i == m + 1 {
                            v
                        } else {
                            v + lambda * du[i - 1]
                        }
                    })
                    .collect();
                let rt = self.residual(&trial);
                let ft = Self::norm(&rt);
                if ft.is_finite() && ft <= (1.0 - 1e-4 * lambda) * f0 {
                    u = trial;
                    r = rt;
                    hist.push(ft);
                    break;
                }
                lambda *= 0.5;
                if lambda < 1e-10 {
                    return Err(Error::NewtonFailed { history: hist });
                }
            }
        }
        if *hist.last().unwrap() <= target {
            Ok((u, hist))
        } else {
            Err(Error::NewtonFailed { history: hist })
        }
    }
}

/// Solves a tridiagonal system (`sub[0]` and `sup[m-1]` are ignored).
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    for i in 0..m {
        let denom = diag[i] - if i > 0 { sub[i] * c[i - 1] } else { 0.0 };
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::numerical("singular tridiagonal system"));
        }
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - if i > 0 { sub[i] * d[i - 1] } else { 0.0 }) / denom;
    }
    for i in (0..m.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpaceTimePoint};
use crate::geometry::SpaceTimeBox;
use crate::params::PParams;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let m = order;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // Three-term recurrence for P_m and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Product mollifier `φ(z) = Π η((zᵢ - cᵢ)/rᵢ)`, `η(s) = exp(-1/(1-s²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestBump {
    pub center: SpaceTimePoint,
    /// Half-widths in each space direction followed by time.
    pub radii: Vec<f64>,
}

fn eta(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn eta_prime(s: f64) -> f64 {
    if s.abs() < 1.0 {
        let d = 1.0 - s * s;
        -2.0 * s / (d * d) * eta(s)
    } else {
        0.0
    }
}

impl TestBump {
    pub fn new(center: SpaceTimePoint, radii: Vec<f64>) -> Result<Self> {
        if radii.len() != center.dim() + 1 || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::param("bump needs one positive radius per coordinate"));
        }
        Ok(TestBump { center, radii })
    }

    fn scaled(&self, z: &SpaceTimePoint) -> Vec<f64> {
        let c = self.center.coords();
        z.coords()
            .iter()
            .zip(&c)
            .zip(&self.radii)
            .map(|((a, b), r)| (a - b) / r)
            .collect()
    }

    pub fn value(&self, z: &SpaceTimePoint) -> f64 {
        self.scaled(z).iter().map(|s| eta(*s)).product()
    }

    /// Derivative along coordinate `axis` (time is the last axis).
    pub fn partial(&self, z: &SpaceTimePoint, axis: usize) -> f64 {
        let s = self.scaled(z);
        s.iter()
            .enumerate()
            .map(|(i, si)| {
                if i == axis {
                    eta_prime(*si) / self.radii[i]
                } else {
                    eta(*si)
                }
            })
            .product()
    }

    pub fn support(&self) -> Result<SpaceTimeBox> {
        let n = self.center.dim();
        SpaceTimeBox::new(
            (0..n).map(|i| self.center.x[i] - self.radii[i]).collect(),
            (0..n).map(|i| self.center.x[i] + self.radii[i]).collect(),
            self.center.t - self.radii[n],
            self.center.t + self.radii[n],
        )
    }
}

/// `∬ |∇u|^{p-2}∇u·∇φ - a u ∂ₜφ` over the bump support by a composite
/// tensor-product Gauss–Legendre rule (`order` nodes on each of 4 panels per
/// axis). Near zero for solutions; `≥ 0` for supersolutions, `≤ 0` for
/// subsolutions.
pub fn weak_form_check(
    field: &ScalarField,
    params: &PParams,
    bump: &TestBump,
    bx: &SpaceTimeBox,
    order: usize,
) -> Result<f64> {
    params.validate()?;
    if order == 0 {
        return Err(Error::param("quadrature order must be ≥ 1"));
    }
    let supp = bump.support()?;
    let n = params.n;
    if supp.dim() != n
        || !(bx.contains_open(&supp.map_unit(&vec![0.0; n + 1])) && bx.contains_open(&supp.map_unit(&vec![1.0; n + 1])))
    {
        return Err(Error::param("bump support must lie strictly inside the box"));
    }
    const PANELS: usize = 4;
    let (gx, gw) = gauss_legendre(order);
    // One-dimensional composite rule on [0, 1].
    let mut nodes = Vec::with_capacity(PANELS * order);
    let mut weights = Vec::with_capacity(PANELS * order);
    for k in 0..PANELS {
        for (x, w) in gx.iter().zip(&gw) {
            nodes.push((k as f64 + 0.5 * (x + 1.0)) / PANELS as f64);
            weights.push(0.5 * w / PANELS as f64);
        }
    }
    let mut vol = supp.t1 - supp.t0;
    for i in 0..n {
        vol *= supp.hi[i] - supp.lo[i];
    }
    let m = nodes.len();
    let total = m.pow((n + 1) as u32);
    let mut sum = 0.0;
    let mut idx = vec![0usize; n + 1];
    for _ in 0..total {
        let u: Vec<f64> = idx.iter().map(|&i| nodes[i]).collect();
        let w: f64 = idx.iter().map(|&i| weights[i]).product();
        let z = supp.map_unit(&u);
        let grad = field.grad(&z);
        let g = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = if g == 0.0 { 0.0 } else { g.powf(params.p - 2.0) };
        let flux: f64 = (0..n).map(|i| scale * grad[i] * bump.partial(&z, i)).sum();
        sum += w * (flux - params.a * field.value(&z) * bump.partial(&z, n));
        for d in idx.iter_mut() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }
    if !sum.is_finite() {
        return Err(Error::numerical("weak form integral is not finite"));
    }
    Ok(sum * vol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barriers::{make_psi_family, NorthPoleParams};

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let i8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((i8 - 2.0 / 9.0).abs() < 1e-14);
        let (x1, w1) = gauss_legendre(1);
        assert_eq!((x1[0], w1[0]), (0.0, 2.0));
    }

    fn setup() -> (TestBump, SpaceTimeBox) {
        let bump = TestBump::new(SpaceTimePoint::new(vec![0.5], 0.5), vec![0.2, 0.2]).unwrap();
        (bump, SpaceTimeBox::new(vec![0.0], vec![1.0], 0.0, 1.0).unwrap())
    }

    #[test]
    fn linear_field_cancels() {
        let (bump, bx) = setup();
        let u = ScalarField::new(1, |z| 3.0 * z.x[0] + 1.0);
        let v = weak_form_check(&u, &PParams::new(3.0, 1).unwrap(), &bump, &bx, 8).unwrap();
        assert!(v.abs() < 1e-10, "{v}");
    }

    #[test]
    fn psi_has_subsolution_sign() {
        let params = PParams::new(2.5, 1).unwrap();
        let fam = make_psi_family(&params, 1.0, &SpaceTimePoint::new(vec![0.5], 0.0)).unwrap();
        let (bump, bx) = setup();
        let v = weak_form_check(&fam.member(2).unwrap(), &params, &bump, &bx, 8).unwrap();
        assert!(v < 0.0, "{v}");
    }

    #[test]
    fn north_pole_f_is_weak_solution() {
        let params = PParams::new(3.0, 1).unwrap();
        let f = NorthPoleParams::new(&params, 1.0, 4.0, 1.6).unwrap().f(4);
        let (bump, bx) = setup();
        // The flux |f'|f' = j²x is linear, so only the bump limits accuracy.
        for order in [4, 8, 12] {
            let v = weak_form_check(&f, &params, &bump, &bx, order).unwrap();
            assert!(v.abs() < 1e-8, "order {order}: {v}");
        }
    }
}

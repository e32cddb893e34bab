use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent `p`, spatial dimension `n` and time multiplier `a` of
/// `a ∂ₜu = Δ_p u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PParams {
    pub p: f64,
    pub n: usize,
    #[serde(default = "one")]
    pub a: f64,
}

fn one() -> f64 {
    1.0
}

impl PParams {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        Self::with_multiplier(p, n, 1.0)
    }

    pub fn with_multiplier(p: f64, n: usize, a: f64) -> Result<Self> {
        let params = PParams { p, n, a };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::param(format!("p must be > 1, got {}", self.p)));
        }
        if self.n == 0 {
            return Err(Error::param("n must be at least 1"));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::param(format!("a must be > 0, got {}", self.a)));
        }
        Ok(())
    }

    /// `λ = n(p-2) + p`.
    pub fn lambda(&self) -> f64 {
        self.n as f64 * (self.p - 2.0) + self.p
    }

    /// Rejects `p = 2` for constructions containing `1/(p-2)`.
    pub fn require_p_ne_2(&self, what: &str) -> Result<()> {
        if self.p == 2.0 {
            Err(Error::param(format!("{what} requires p ≠ 2")))
        } else {
            Ok(())
        }
    }

    pub fn require_lambda_positive(&self, what: &str) -> Result<()> {
        if self.lambda() > 0.0 {
            Ok(())
        } else {
            Err(Error::param(format!(
                "{what} requires λ = n(p-2)+p > 0, got {}",
                self.lambda()
            )))
        }
    }

    pub fn with_a(self, a: f64) -> Result<Self> {
        Self::with_multiplier(self.p, self.n, a)
    }
}

pub fn lambda_of(params: &PParams) -> f64 {
    params.lambda()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_of(&PParams::new(3.0, 1).unwrap()), 4.0);
        assert_eq!(lambda_of(&PParams::new(2.0, 5).unwrap()), 2.0);
        assert_eq!(lambda_of(&PParams::new(1.5, 1).unwrap()), 1.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PParams::new(1.0, 1).is_err());
        assert!(PParams::new(3.0, 0).is_err());
        assert!(PParams::with_multiplier(3.0, 1, 0.0).is_err());
        assert!(PParams::new(2.0, 1).unwrap().require_p_ne_2("x").is_err());
    }

    proptest::proptest! {
        #[test]
        fn lambda_is_affine_in_p(p in 1.01f64..6.0, q in 1.01f64..6.0, n in 1usize..5) {
            let lp = PParams::new(p, n).unwrap().lambda();
            let lq = PParams::new(q, n).unwrap().lambda();
            let mid = PParams::new(0.5 * (p + q), n).unwrap().lambda();
            proptest::prop_assert!((mid - 0.5 * (lp + lq)).abs() < 1e-12);
            proptest::prop_assert!(((lp - lq) - (n as f64 + 1.0) * (p - q)).abs() < 1e-12);
        }
    }
}

//! Parameter grids and helpers shared by the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

pub mod criteria;

use pbl_core::barriers::FamilySpec;
use pbl_core::PParams;

pub const P_GRID: [f64; 4] = [1.5, 2.5, 3.0, 4.0];

/// North-pole exponents satisfying the constructor's constraints for `p`.
pub fn north_pole_spec(p: f64) -> FamilySpec {
    let q = p / (p - 1.0);
    if p < 2.0 {
        FamilySpec::NorthPole {
            theta: 0.5,
            l: q,
            k: q + 1.0,
        }
    } else {
        let k = 2.0f64.max(q + 0.5);
        let l = p.max(q + k * (p - 2.0)) + 0.5;
        FamilySpec::NorthPole { theta: 0.5, l, k }
    }
}

/// Every (params, family) pair of the certification grid: the p grid
/// filtered by each family's range, n ∈ {1, 2} where the family allows it.
pub fn certification_grid() -> Vec<(PParams, FamilySpec)> {
    let mut out = Vec::new();
    for p in P_GRID {
        for n in [1usize, 2] {
            let params = PParams::new(p, n).unwrap();
            out.push((params, FamilySpec::Psi { diam: 1.0, base: None }));
            let mut xi1 = vec![0.0; n + 1];
            xi1[0] = 1.0;
            out.push((params, FamilySpec::ExteriorBall { xi1 }));
            out.push((params, north_pole_spec(p)));
            if n == 1 {
                out.push((params, FamilySpec::Cone1d { gamma: 1.0 }));
            }
            if p > 2.0 {
                out.push((params, FamilySpec::Petrovskii { alpha: 1.0, k: 1.0 }));
            } else {
                out.push((
                    params,
                    FamilySpec::SingularFinal {
                        l: 1.0,
                        k: 2.0,
                        alpha: None,
                    },
                ));
            }
        }
    }
    out
}

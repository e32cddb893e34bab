mod common;

use common::criteria::*;
use pbl_core::barriers::{check_family_conditions, make_family, ConditionOptions, FamilySpec, PetrovskiiParams};
use pbl_core::residual::{certify, CertOptions};
use pbl_core::{PParams, SolutionKind};

#[test]
fn closed_form_residuals_converge_at_second_order() {
    for (name, params, w, dom, h) in closed_form_cases() {
        let e = fd_errors(&params, &w, &dom, h);
        for r in [e[0] / e[1], e[1] / e[2]] {
            assert!((2.0..=8.0).contains(&r), "{name}: errors {e:?}");
        }
    }
}

#[test]
fn certification_grid_has_no_violations() {
    let out = criterion_2();
    assert!(out.pass, "{}", out.detail);
}

#[test]
fn families_vanish_at_base_point_and_dominate_gauge() {
    for (params, spec, fam) in condition_families() {
        let r = check_family_conditions(&fam, fam.j_min, &ConditionOptions::default()).unwrap();
        assert!(r.passed(), "{} p={} n={}: {r:?}", spec.name(), params.p, params.n);
        assert!(r.limit.len() == 3);
    }
}

#[test]
fn gauge_index_grows_with_level() {
    for (_, spec, fam) in condition_families() {
        let js: Vec<u64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|k| fam.index_for_gauge(*k).unwrap())
            .collect();
        assert!(js.windows(2).all(|w| w[0] <= w[1]), "{}: {js:?}", spec.name());
    }
}

#[test]
fn petrovskii_calibration_p3() {
    let out = criterion_4();
    assert!(out.pass, "{}", out.detail);
}

#[test]
fn calibration_oracles_agree_off_the_closed_case() {
    for (p, n, alpha) in [(2.5, 1usize, 1.0), (4.0, 2, 0.7), (3.0, 1, 2.0)] {
        let params = PParams::new(p, n).unwrap();
        let pp = PetrovskiiParams::new(&params, alpha, 1.0).unwrap();
        let golden = golden_oracle(p, n as f64, alpha);
        let newton = newton_oracle(p, n as f64, alpha);
        assert!(
            (golden - newton).abs() < 1e-9 * newton,
            "{p} {n} {alpha}: {golden} vs {newton}"
        );
        assert!(
            (pp.m - newton).abs() < 1e-9 * newton,
            "{p} {n} {alpha}: {} vs {newton}",
            pp.m
        );
    }
}

#[test]
fn psi_is_a_subsolution_and_fails_as_supersolution() {
    let params = PParams::new(2.5, 1).unwrap();
    let fam = make_family(&params, &FamilySpec::Psi { diam: 1.0, base: None }).unwrap();
    let w = fam.member(fam.j_min).unwrap();
    let sub = CertOptions {
        count: 2000,
        seed: 3,
        kind: SolutionKind::Subsolution,
        ..Default::default()
    };
    assert_eq!(certify(&w, &params, &fam.domain, &sub).unwrap().violations, 0);
    let sup = CertOptions {
        kind: SolutionKind::Supersolution,
        ..sub
    };
    assert!(certify(&w, &params, &fam.domain, &sup).unwrap().violations > 0);
}

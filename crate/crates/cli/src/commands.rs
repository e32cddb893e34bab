use std::collections::BTreeMap;
use std::path::Path;

use anyhow::bail;
use pbl_core::barriers::{
    barenblatt_field, check_family_conditions, make_family, ConditionOptions, ConditionReport, FamilySpec,
};
use pbl_core::geometry::{rasterize, uniform_levels};
use pbl_core::residual::{certify, CertOptions, CertReport};
use pbl_core::solver::{
    check_scaling_identity, probe_scenario, ProbeReport, ProbeScenario, ScalingReport, SolverOptions, Verdict,
};
use pbl_core::{make_domain, DomainGeometry, DomainSpec, PParams, ScalarField, SolutionKind, SpaceTimePoint};
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, IndexChoice, ProbeConfig, ScalingConfig, VerifyConfig};
use crate::report::{Output, Report, SCHEMA};

/// Runs a resolved config, writes its files and returns whether it passed.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> anyhow::Result<bool> {
    match config {
        ExperimentConfig::VerifyBarrier(c) => verify_barrier(config, c, out_dir),
        ExperimentConfig::Probe(c) => probe(config, c, out_dir),
        ExperimentConfig::Scaling(c) => scaling(config, c, out_dir),
    }
}

fn finish<T: Serialize>(
    config: &ExperimentConfig,
    out: &Output,
    passed: bool,
    summary: String,
    constants: BTreeMap<String, f64>,
    result: T,
    files: Vec<String>,
) -> anyhow::Result<bool> {
    let report = Report {
        schema: SCHEMA,
        command: config.command(),
        config,
        config_sha256: config.checksum(),
        passed,
        summary: summary.clone(),
        constants,
        result,
        files,
    };
    let path = out.write_report(&report)?;
    println!("{summary}");
    println!("{} {}", if passed { "PASS" } else { "FAIL" }, path.display());
    Ok(passed)
}

#[derive(Serialize)]
struct VerifyResult {
    family: String,
    j: u64,
    j_auto: bool,
    kind: SolutionKind,
    excluded_fraction: f64,
    certification: CertReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditions: Option<ConditionReport>,
}

/// The Barenblatt solution is certified on `(−1, 1)ⁿ × (1, 2)`, inside its
/// support for `C = 1`.
fn barenblatt_target(params: &PParams, c: f64) -> anyhow::Result<(ScalarField, DomainGeometry)> {
    let n = params.n;
    let domain = make_domain(&DomainSpec::Box {
        lo: vec![-1.0; n],
        hi: vec![1.0; n],
        t0: 1.0,
        t1: 2.0,
    })?;
    Ok((barenblatt_field(params, c)?, domain))
}

fn verify_barrier(config: &ExperimentConfig, c: &VerifyConfig, out_dir: &Path) -> anyhow::Result<bool> {
    let params = PParams::with_multiplier(c.p, c.n, c.a)?;
    let (field, domain, family_kind, j, constants, family) = match &c.family {
        FamilySpec::Barenblatt { c: scale } => {
            if c.conditions {
                return Err(
                    ConfigError("--conditions needs a barrier family, not the Barenblatt solution".into()).into(),
                );
            }
            let (field, domain) = barenblatt_target(&params, *scale)?;
            let constants = BTreeMap::from([("C".to_string(), *scale), ("lambda".to_string(), params.lambda())]);
            (field, domain, SolutionKind::Supersolution, 0, constants, None)
        }
        spec => {
            let fam = make_family(&params, spec)?;
            let j = match c.j {
                IndexChoice::Auto => fam.j_min,
                IndexChoice::Index(j) => j,
            };
            let w = fam.member(j)?;
            let constants = fam.constants(Some(j));
            (w, fam.domain.clone(), fam.kind, j, constants, Some(fam))
        }
    };
    let kind = c.kind.unwrap_or(family_kind);
    let opts = CertOptions {
        count: c.samples,
        seed: c.seed,
        tol: c.tol,
        step: c.step,
        kind,
        per_point: c.per_point,
    };
    let mut cert = certify(&field, &params, &domain, &opts)?;
    let conditions = match (&family, c.conditions) {
        (Some(fam), true) => Some(check_family_conditions(
            fam,
            j,
            &ConditionOptions {
                seed: c.seed,
                ..Default::default()
            },
        )?),
        _ => None,
    };

    let out = Output::new(out_dir, config, c.family.name())?;
    let mut files = Vec::new();
    if c.per_point {
        files.push(out.write_text("csv", &cert.to_csv())?);
        cert.records.clear();
    }
    let passed = cert.passed() && conditions.as_ref().is_none_or(|r| r.passed());
    let member = if family.is_some() {
        format!(" j={j}")
    } else {
        String::new()
    };
    let summary = format!(
        "{}{member} as {}: {} violations in {} samples, min residual {:.3e}, excluded {:.4}{}",
        c.family.name(),
        kind_name(kind),
        cert.violations,
        cert.points_sampled,
        cert.min_residual,
        cert.excluded_fraction(),
        conditions
            .as_ref()
            .map(|r| format!(", limit {} gauge {}", ok(r.limit_ok), ok(r.gauge_ok())))
            .unwrap_or_default()
    );
    let result = VerifyResult {
        family: c.family.name().to_string(),
        j,
        j_auto: c.j == IndexChoice::Auto,
        kind,
        excluded_fraction: cert.excluded_fraction(),
        certification: cert,
        conditions,
    };
    finish(config, &out, passed, summary, constants, result, files)
}

fn kind_name(kind: SolutionKind) -> &'static str {
    match kind {
        SolutionKind::Supersolution => "supersolution",
        SolutionKind::Subsolution => "subsolution",
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "failed"
    }
}

#[derive(Serialize)]
struct ProbeResult {
    scenario: ProbeScenario,
    report: ProbeReport,
}

fn probe(config: &ExperimentConfig, c: &ProbeConfig, out_dir: &Path) -> anyhow::Result<bool> {
    let expected = match c.expect.as_deref() {
        None => None,
        Some("regular") => Some(Verdict::ConsistentWithRegular),
        Some("irregular") => Some(Verdict::ConsistentWithIrregular),
        Some(other) => bail!(ConfigError(format!("--expect takes regular or irregular, got {other}"))),
    };
    let mut scenario = probe_scenario(&c.domain, &c.point, c.p)?;
    if let Some(alpha) = c.alpha {
        scenario.options.alpha = alpha;
    }
    if let Some(r) = c.r_max {
        scenario.options.r_max = r;
    }
    if let Some(k) = c.radii {
        scenario.options.radii = k;
    }
    if let Some(h) = &c.refinements {
        scenario.refinements = h.clone();
    }
    let report = scenario.run()?;
    let out = Output::new(out_dir, config, &format!("{}-{}", c.domain, c.point))?;
    let files = vec![out.write_text("csv", &report.to_csv())?];
    let passed = expected.is_none_or(|v| v == report.verdict);
    let summary = format!(
        "{}/{} p={}: {} ({})",
        c.domain,
        c.point,
        scenario.params.p,
        report.verdict.as_str(),
        report.reason
    );
    let constants = BTreeMap::from([("datum_scale".to_string(), report.datum_scale)]);
    finish(
        config,
        &out,
        passed,
        summary,
        constants,
        ProbeResult { scenario, report },
        files,
    )
}

/// Boundary data of the scaling check: `Σ sin(3xᵢ) + ½|x − 0.4| + t`.
fn scaling_datum(z: &SpaceTimePoint) -> f64 {
    let s: f64 = z.x.iter().map(|x| (3.0 * x).sin()).sum();
    let r = z.x.iter().map(|x| (x - 0.4).powi(2)).sum::<f64>().sqrt();
    s + 0.5 * r + z.t
}

fn scaling(config: &ExperimentConfig, c: &ScalingConfig, out_dir: &Path) -> anyhow::Result<bool> {
    let params = PParams::new(c.p, c.n)?;
    params.require_p_ne_2("the scaling identity")?;
    if !(c.a.is_finite() && c.a > 0.0) {
        bail!(ConfigError(format!("the multiplier a must be > 0, got {}", c.a)));
    }
    let domain = make_domain(&DomainSpec::Box {
        lo: vec![0.0; c.n],
        hi: vec![1.0; c.n],
        t0: 0.0,
        t1: c.t1,
    })?;
    let mask = rasterize(&domain, c.h, &uniform_levels(0.0, c.t1, c.levels))?;
    let opts = SolverOptions {
        delta: c.delta,
        cfl: c.cfl,
        ..Default::default()
    };
    let report: ScalingReport = check_scaling_identity(&params, c.a, &mask, &scaling_datum, &opts)?;
    let out = Output::new(out_dir, config, &format!("p{}-a{}", c.p, c.a))?;
    let passed = report.discrepancy <= c.tol;
    let summary = format!(
        "p={} a={}: factor {} discrepancy {:.3e} (tol {:.1e}) over {} steps",
        c.p, c.a, report.factor, report.discrepancy, c.tol, report.steps
    );
    let constants = BTreeMap::from([
        ("factor".to_string(), report.factor),
        ("delta".to_string(), report.delta_plain),
        ("delta_multiplied".to_string(), report.delta_multiplied),
    ]);
    finish(config, &out, passed, summary, constants, report, Vec::new())
}

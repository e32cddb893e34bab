//! `pbl`: certification, regularity probes and scaling checks for the
//! p-parabolic equation, with JSON reports.
//!
//! Exit codes: 0 pass, 1 verification failed, 2 bad parameters,
//! 3 numerical abort.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use config::{read_file, resolve, ConfigError, IndexChoice, Overrides};

/// Environment variable overriding the output directory.
const OUT_ENV: &str = "PBL_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "pbl",
    version,
    about = "Boundary-regularity experiments for the p-parabolic equation"
)]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: $PBL_OUT_DIR, then ./pbl-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Print the resolved config as JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify the supersolution (or subsolution) inequality for a barrier.
    VerifyBarrier(VerifyArgs),
    /// Estimate D(r, h) near a boundary point and classify it.
    Probe(ProbeArgs),
    /// Check the time-multiplier scaling identity on a cylinder.
    Scaling(ScalingArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// psi, exterior_ball, north_pole, cone1d, petrovskii, singular_final or barenblatt.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Multiplier of the time derivative.
    #[arg(long)]
    a: Option<f64>,
    /// Member index, or `auto` for the smallest admissible one.
    #[arg(long)]
    j: Option<IndexChoice>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// supersolution or subsolution.
    #[arg(long = "as", value_parser = ["supersolution", "subsolution"])]
    kind: Option<String>,
    /// Write one CSV row per sample.
    #[arg(long)]
    per_point: bool,
    /// Also check vanishing at the base point and the gauge bound.
    #[arg(long)]
    conditions: bool,

    #[arg(long)]
    diam: Option<f64>,
    /// Base point of psi as x1,..,t.
    #[arg(long, value_delimiter = ',')]
    base: Option<Vec<f64>>,
    /// Exterior ball centre as x1,..,t.
    #[arg(long, value_delimiter = ',')]
    xi1: Option<Vec<f64>>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    /// Family constant K (north pole k).
    #[arg(long = "K", visible_alias = "k")]
    k: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Barenblatt constant C.
    #[arg(long = "C", visible_alias = "c")]
    c: Option<f64>,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    /// cylinder, barenblatt_ball, petrovskii or singular_final.
    #[arg(long)]
    domain: Option<String>,
    /// lateral, earliest or origin-final.
    #[arg(long)]
    point: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    /// Datum exponent in |ξ − ξ₀|^α.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    radii: Option<usize>,
    /// Grid spacings, coarse to fine.
    #[arg(long, value_delimiter = ',')]
    refinements: Option<Vec<f64>>,
    /// regular or irregular; another verdict exits with 1.
    #[arg(long)]
    expect: Option<String>,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Multiplier of the time derivative.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

fn overrides(cmd: &Command) -> Overrides {
    let mut o = Overrides::default();
    match cmd {
        Command::VerifyBarrier(v) => {
            o.set("p", v.p);
            o.set("n", v.n);
            o.set("a", v.a);
            o.set("j", v.j.map(|j| serde_json::to_value(j).unwrap()));
            o.set("samples", v.samples);
            o.set("seed", v.seed);
            o.set("tol", v.tol);
            o.set("step", v.step);
            o.set("as", v.kind.clone());
            o.set("per_point", v.per_point.then_some(true));
            o.set("conditions", v.conditions.then_some(true));
            o.set_family("family", v.family.clone());
            o.set_family("diam", v.diam);
            o.set_family("base", v.base.clone());
            o.set_family("xi1", v.xi1.clone());
            o.set_family("theta", v.theta);
            o.set_family("l", v.l);
            o.set_family("k", v.k);
            o.set_family("gamma", v.gamma);
            o.set_family("alpha", v.alpha);
            o.set_family("c", v.c);
        }
        Command::Probe(v) => {
            o.set("domain", v.domain.clone());
            o.set("point", v.point.clone());
            o.set("p", v.p);
            o.set("alpha", v.alpha);
            o.set("r_max", v.r_max);
            o.set("radii", v.radii);
            o.set("refinements", v.refinements.clone());
            o.set("expect", v.expect.clone());
        }
        Command::Scaling(v) => {
            o.set("p", v.p);
            o.set("n", v.n);
            o.set("a", v.a);
            o.set("h", v.h);
            o.set("t1", v.t1);
            o.set("levels", v.levels);
            o.set("delta", v.delta);
            o.set("cfl", v.cfl);
            o.set("tol", v.tol);
        }
    }
    o
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::VerifyBarrier(_) => "verify-barrier",
        Command::Probe(_) => "probe",
        Command::Scaling(_) => "scaling",
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (file, file_out) = match &cli.config {
        Some(path) => {
            let (map, out) = read_file(path)?;
            (Some(map), out)
        }
        None => (None, None),
    };
    let config = resolve(command_name(&cli.command), file, overrides(&cli.command))?;
    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&config)?);
        return Ok(true);
    }
    let out_dir = cli
        .out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| file_out.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("pbl-out"));
    commands::run(&config, &out_dir)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<pbl_core::Error>() {
        Some(e) if e.is_parameter_error() || matches!(e, pbl_core::Error::EmptySample(_)) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

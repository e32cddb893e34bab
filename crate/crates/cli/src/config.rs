//! Experiment configuration: a JSON file, command-line flags, or both.
//!
//! A config file is a flat JSON object with the same keys as the flags
//! (`"family"` is a nested family object). Flags override the file. The
//! resolved config serializes back to a file that reproduces the run.

use std::fmt;
use std::path::Path;

use pbl_core::barriers::FamilySpec;
use pbl_core::SolutionKind;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Bad configuration input; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    VerifyBarrier(VerifyConfig),
    Probe(ProbeConfig),
    Scaling(ScalingConfig),
}

/// Which member of the family to certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexChoice {
    /// The family's smallest admissible index.
    #[default]
    Auto,
    #[serde(untagged)]
    Index(u64),
}

impl std::str::FromStr for IndexChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(IndexChoice::Auto);
        }
        s.parse()
            .map(IndexChoice::Index)
            .map_err(|_| format!("expected `auto` or a positive integer, got `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub p: f64,
    #[serde(default = "one_usize")]
    pub n: usize,
    #[serde(default = "one")]
    pub a: f64,
    pub family: FamilySpec,
    #[serde(default)]
    pub j: IndexChoice,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Finite-difference step for fields without closed forms.
    #[serde(default)]
    pub step: Option<f64>,
    /// Sign to certify; the family's own kind when absent.
    #[serde(default, rename = "as")]
    pub kind: Option<SolutionKind>,
    #[serde(default)]
    pub per_point: bool,
    /// Also check vanishing at the base point and the gauge bound.
    #[serde(default)]
    pub conditions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub domain: String,
    pub point: String,
    #[serde(default)]
    pub p: Option<f64>,
    /// Datum exponent in `|ξ − ξ₀|^α`.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub radii: Option<usize>,
    #[serde(default)]
    pub refinements: Option<Vec<f64>>,
    /// `regular` or `irregular`; a different verdict exits with 1.
    #[serde(default)]
    pub expect: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub p: f64,
    #[serde(default = "one_usize")]
    pub n: usize,
    /// Multiplier of the time derivative.
    pub a: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_t1")]
    pub t1: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_scaling_tol")]
    pub tol: f64,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_samples() -> usize {
    10_000
}
fn default_tol() -> f64 {
    1e-8
}
fn default_h() -> f64 {
    0.02
}
fn default_t1() -> f64 {
    0.05
}
fn default_levels() -> usize {
    5
}
fn default_cfl() -> f64 {
    0.45
}
fn default_scaling_tol() -> f64 {
    1e-10
}

impl ExperimentConfig {
    pub fn command(&self) -> &'static str {
        match self {
            ExperimentConfig::VerifyBarrier(_) => "verify-barrier",
            ExperimentConfig::Probe(_) => "probe",
            ExperimentConfig::Scaling(_) => "scaling",
        }
    }

    /// Hex SHA-256 of the compact JSON form with sorted keys.
    pub fn checksum(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let json = serde_json::to_string(&value).expect("value serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }
}

/// Flag values for one command: top-level keys and keys of the family object.
#[derive(Debug, Default)]
pub struct Overrides {
    pub top: Map<String, Value>,
    pub family: Map<String, Value>,
}

impl Overrides {
    pub fn set(&mut self, key: &str, v: Option<impl Into<Value>>) {
        if let Some(v) = v {
            self.top.insert(key.to_string(), v.into());
        }
    }

    pub fn set_family(&mut self, key: &str, v: Option<impl Into<Value>>) {
        if let Some(v) = v {
            self.family.insert(key.to_string(), v.into());
        }
    }
}

/// Reads a config file; an `out_dir` key is returned separately since the
/// output location is not part of the experiment.
pub fn read_file(path: &Path) -> anyhow::Result<(Map<String, Value>, Option<String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let Value::Object(mut map) = value else {
        return Err(bad(format!("{}: expected a JSON object", path.display())));
    };
    let out = match map.remove("out_dir") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(other) => return Err(bad(format!("out_dir must be a string, got {other}"))),
    };
    Ok((map, out))
}

/// Merges file values and flags into a config for `command`.
pub fn resolve(command: &str, file: Option<Map<String, Value>>, flags: Overrides) -> anyhow::Result<ExperimentConfig> {
    let mut map = file.unwrap_or_default();
    match map.get("command") {
        None => {}
        Some(Value::String(c)) if c == command => {}
        Some(other) => return Err(bad(format!("config file is for command {other}, not {command}"))),
    }
    map.insert("command".into(), Value::String(command.into()));
    for (k, v) in flags.top {
        map.insert(k, v);
    }

    if !flags.family.is_empty() {
        let mut family = match map.remove("family") {
            Some(Value::Object(f)) => f,
            None => Map::new(),
            Some(other) => return Err(bad(format!("family must be an object, got {other}"))),
        };
        if let Some(name) = flags.family.get("family") {
            if family.get("family") != Some(name) {
                family = Map::new();
            }
        }
        for (k, v) in &flags.family {
            family.insert(k.clone(), v.clone());
        }
        map.insert("family".into(), Value::Object(family));
    }

    let config: ExperimentConfig = serde_json::from_value(Value::Object(map)).map_err(|e| bad(e.to_string()))?;

    // Family flags the chosen family does not take are rejected, not ignored.
    if let ExperimentConfig::VerifyBarrier(v) = &config {
        let spec = serde_json::to_value(&v.family)?;
        for key in flags.family.keys() {
            if spec.get(key).is_none() {
                return Err(bad(format!("--{key} does not apply to family {}", v.family.name())));
            }
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn petrovskii_flags() -> Overrides {
        let mut o = Overrides::default();
        o.set("p", Some(3.0));
        o.set_family("family", Some("petrovskii"));
        o.set_family("alpha", Some(1.0));
        o.set_family("k", Some(1.0));
        o
    }

    #[test]
    fn flags_alone_resolve_with_defaults() {
        let c = resolve("verify-barrier", None, petrovskii_flags()).unwrap();
        let ExperimentConfig::VerifyBarrier(v) = &c else {
            panic!()
        };
        assert_eq!(v.family, FamilySpec::Petrovskii { alpha: 1.0, k: 1.0 });
        assert_eq!((v.n, v.samples, v.j), (1, 10_000, IndexChoice::Auto));
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = resolve("verify-barrier", None, petrovskii_flags()).unwrap();
        let Value::Object(map) = serde_json::to_value(&c).unwrap() else {
            panic!()
        };
        let again = resolve("verify-barrier", Some(map), Overrides::default()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.checksum(), again.checksum());
    }

    #[test]
    fn flags_override_file() {
        let file: Map<String, Value> = serde_json::from_str(
            r#"{"command":"verify-barrier","p":3,"samples":5,"family":{"family":"petrovskii","alpha":1,"k":2}}"#,
        )
        .unwrap();
        let mut flags = Overrides::default();
        flags.set("samples", Some(7));
        flags.set_family("k", Some(0.5));
        let ExperimentConfig::VerifyBarrier(v) = resolve("verify-barrier", Some(file), flags).unwrap() else {
            panic!()
        };
        assert_eq!(v.samples, 7);
        assert_eq!(v.family, FamilySpec::Petrovskii { alpha: 1.0, k: 0.5 });
    }

    #[test]
    fn rejects_foreign_family_flag_and_wrong_command() {
        let mut flags = petrovskii_flags();
        flags.set_family("gamma", Some(1.0));
        assert!(resolve("verify-barrier", None, flags).is_err());
        let file: Map<String, Value> = serde_json::from_str(r#"{"command":"probe"}"#).unwrap();
        assert!(resolve("scaling", Some(file), Overrides::default()).is_err());
    }

    #[test]
    fn index_choice_forms() {
        assert_eq!("auto".parse::<IndexChoice>().unwrap(), IndexChoice::Auto);
        assert_eq!("12".parse::<IndexChoice>().unwrap(), IndexChoice::Index(12));
        assert!("x".parse::<IndexChoice>().is_err());
        assert_eq!(serde_json::to_string(&IndexChoice::Auto).unwrap(), r#""auto""#);
        assert_eq!(
            serde_json::from_str::<IndexChoice>("12").unwrap(),
            IndexChoice::Index(12)
        );
    }
}

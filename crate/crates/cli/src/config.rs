//! Experiment configuration: a JSON document with flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sharp_subgrad::problems::{self, GeneratorSpec};
use sharp_subgrad::{solvers, Aggregation, FBarModel, Oracle, ProblemInstance, SolverConfig};

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SHARP_SUBGRAD_OUT";

/// Largest dimension accepted without `--scale full`.
pub const DESK_MAX_N: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Artifact {
    TraceCsv,
    SummaryJson,
    InstanceJson,
    VerifyJson,
}

impl FromStr for Artifact {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| {
            format!("unknown artifact `{s}` (expected trace_csv, summary_json, instance_json, verify_json)")
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// Dimensions up to a few thousand.
    #[default]
    Desk,
    /// The dimensions of the published experiments.
    Full,
}

/// How `f̄` is chosen once the instance is known.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FBarSpec {
    /// `f̄ = f*`; needs a family with known optimal value.
    #[default]
    Exact,
    Value(f64),
    /// `f̄ = f* + t·(f(x₀) − f*)`.
    Fraction(f64),
}

impl FromStr for FBarSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "exact" {
            return Ok(FBarSpec::Exact);
        }
        if let Some(t) = s.strip_prefix("frac:") {
            return t
                .parse()
                .map(FBarSpec::Fraction)
                .map_err(|_| format!("bad fraction in fbar `{s}`"));
        }
        s.parse()
            .map(FBarSpec::Value)
            .map_err(|_| format!("fbar must be `exact`, a number or `frac:<t>`, got `{s}`"))
    }
}

impl TryFrom<String> for FBarSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<FBarSpec> for String {
    fn from(spec: FBarSpec) -> String {
        spec.to_string()
    }
}

impl fmt::Display for FBarSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FBarSpec::Exact => write!(f, "exact"),
            FBarSpec::Value(v) => write!(f, "{v:?}"),
            FBarSpec::Fraction(t) => write!(f, "frac:{t:?}"),
        }
    }
}

/// Solver settings as written by the user; `f̄` is resolved per instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "defaults::algorithm")]
    pub algorithm: String,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub fbar: FBarSpec,
    #[serde(default = "defaults::big_c")]
    pub big_c: f64,
    #[serde(default = "defaults::gamma0")]
    pub gamma0: f64,
    #[serde(default = "defaults::max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub aggregation: Aggregation,
    /// Needed by `verify`; off by default only at full scale.
    #[serde(default)]
    pub record_points: Option<bool>,
    #[serde(default)]
    pub early_stop: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        serde_json::from_value(Value::Object(Map::new())).expect("all solver fields have defaults")
    }
}

mod defaults {
    pub fn algorithm() -> String {
        "eps".into()
    }
    pub fn epsilon() -> f64 {
        1e-3
    }
    pub fn big_c() -> f64 {
        1.0
    }
    pub fn gamma0() -> f64 {
        0.5
    }
    pub fn max_iters() -> usize {
        1000
    }
    pub fn emit() -> Vec<super::Artifact> {
        use super::Artifact::*;
        vec![TraceCsv, SummaryJson, InstanceJson]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub solver: SolverSettings,
    pub output_dir: PathBuf,
    #[serde(default = "defaults::emit")]
    pub emit: Vec<Artifact>,
    #[serde(default)]
    pub scale: Scale,
}

impl ExperimentConfig {
    pub fn emits(&self, artifact: Artifact) -> bool {
        self.emit.contains(&artifact)
    }

    pub fn record_points(&self) -> bool {
        self.solver.record_points.unwrap_or(self.scale == Scale::Desk)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.generator.validate()?;
        let family = problems::get_family(&self.generator.family)?;
        if let Some(v) = &self.generator.variant {
            if !family.variants().contains(&v.as_str()) {
                return Err(CliError::Config(format!(
                    "family `{}` has no variant `{v}` (known: {})",
                    self.generator.family,
                    family.variants().join(", ")
                )));
            }
        }
        solvers::get_method(&self.solver.algorithm)?;
        if self.emit.is_empty() {
            return Err(CliError::Config("emit must name at least one artifact".into()));
        }
        if self.emits(Artifact::VerifyJson) && !self.record_points() {
            return Err(CliError::Config("verify_json needs record_points = true".into()));
        }
        if self.scale == Scale::Desk && self.generator.n > DESK_MAX_N {
            return Err(CliError::Config(format!(
                "n = {} exceeds the desk limit {DESK_MAX_N}; pass --scale full",
                self.generator.n
            )));
        }
        Ok(())
    }

    /// Concrete solver configuration for a generated instance.
    pub fn solver_config(&self, problem: &ProblemInstance) -> CliResult<SolverConfig> {
        let s = &self.solver;
        let f_star = problem.ground_truth.as_ref().map(|t| t.f_star);
        let need_f_star = || {
            f_star.ok_or_else(|| {
                CliError::Config(format!(
                    "fbar `{}` needs f*, which family `{}` does not provide",
                    s.fbar, self.generator.family
                ))
            })
        };
        let f_bar = match s.fbar {
            FBarSpec::Exact => need_f_star()?,
            FBarSpec::Value(v) => v,
            FBarSpec::Fraction(t) => {
                let f_star = need_f_star()?;
                let x0 = problem.projector.project(&problem.start_point())?;
                let f0 = problem.objective.value(&x0)?;
                f_star + t * (f0 - f_star)
            }
        };
        let mut config = SolverConfig::new(&s.algorithm, s.epsilon, FBarModel::new(f_bar, s.big_c, f_star)?, s.max_iters);
        config.gamma0 = s.gamma0;
        config.aggregation = s.aggregation;
        config.record_points = self.record_points();
        config.early_stop = s.early_stop;
        config.seed = self.generator.seed;
        config.validate()?;
        Ok(config)
    }
}

/// Dimensions of the published experiments, used under `--scale full`.
pub fn full_scale_dims(family: &str, variant: Option<&str>) -> Option<(usize, usize)> {
    match (family, variant) {
        ("geometric", _) => Some((1000, 100)),
        ("ratio", Some("linear-max")) => Some((1000, 100)),
        ("ratio", _) => Some((100_000, 1)),
        ("truss", _) => Some((1000, 100)),
        ("kl", _) => Some((100_000, 1)),
        _ => None,
    }
}

pub fn read_json_file(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("cannot parse config {}: {e}", path.display())))
}

/// Recursively overlay `top` onto `base`; objects merge, everything else replaces.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (key, value) in t {
                merge(b.entry(key).or_insert(Value::Null), value);
            }
        }
        (slot, value) => *slot = value,
    }
}

/// Build a config from an optional file and flag overrides.
///
/// The output directory falls back to `SHARP_SUBGRAD_OUT`, then `results`.
pub fn assemble(file: Option<Value>, overrides: Value) -> CliResult<ExperimentConfig> {
    let mut doc = file.unwrap_or_else(|| Value::Object(Map::new()));
    if !doc.is_object() {
        return Err(CliError::Config("config must be a JSON object".into()));
    }
    merge(&mut doc, overrides);

    let generator = doc
        .as_object_mut()
        .expect("checked above")
        .entry("generator")
        .or_insert_with(|| Value::Object(Map::new()));
    let Some(generator) = generator.as_object_mut() else {
        return Err(CliError::Config("`generator` must be an object".into()));
    };
    let family = match generator.get("family") {
        Some(Value::String(f)) => f.clone(),
        _ => return Err(CliError::Config("missing --family".into())),
    };
    let full = doc.get("scale").and_then(Value::as_str) == Some("full");
    let generator = doc["generator"].as_object_mut().expect("checked above");
    if full {
        let variant = generator.get("variant").and_then(Value::as_str);
        if let Some((n, m)) = full_scale_dims(&family, variant) {
            generator.entry("n").or_insert(n.into());
            generator.entry("m").or_insert(m.into());
        }
    }
    if !generator.contains_key("n") {
        return Err(CliError::Config("missing --n".into()));
    }

    let doc_map = doc.as_object_mut().expect("checked above");
    if doc_map.get("output_dir").is_none_or(Value::is_null) {
        let dir = std::env::var(OUT_ENV).unwrap_or_else(|_| "results".into());
        doc_map.insert("output_dir".into(), Value::String(dir));
    }
    let config: ExperimentConfig =
        serde_json::from_value(doc).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn fbar_spec_round_trips() {
        for s in ["exact", "-0.25", "frac:0.5"] {
            let spec: FBarSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<FBarSpec>().unwrap(), spec);
        }
        assert!("frac:x".parse::<FBarSpec>().is_err());
        assert!("nearly".parse::<FBarSpec>().is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let file = json!({"generator": {"family": "synthetic-sharp", "n": 5, "seed": 3}, "solver": {"epsilon": 0.1}, "output_dir": "a"});
        let flags = json!({"generator": {"n": 7}, "solver": {"algorithm": "cond"}});
        let c = assemble(Some(file), flags).unwrap();
        assert_eq!(c.generator.n, 7);
        assert_eq!(c.generator.seed, 3);
        assert_eq!(c.solver.epsilon, 0.1);
        assert_eq!(c.solver.algorithm, "cond");
        assert_eq!(c.output_dir, PathBuf::from("a"));
    }

    #[test]
    fn missing_family_and_bad_values_are_config_errors() {
        let err = assemble(None, json!({"generator": {"n": 3}})).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = assemble(None, json!({"generator": {"family": "nope", "n": 3}, "output_dir": "x"})).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = assemble(None, json!({"generator": {"family": "kl", "n": 9000}, "output_dir": "x"})).unwrap_err();
        assert!(err.to_string().contains("--scale full"));
    }

    #[test]
    fn full_scale_fills_benchmark_dimensions() {
        let c = assemble(None, json!({"generator": {"family": "kl"}, "scale": "full", "output_dir": "x"})).unwrap();
        assert_eq!(c.generator.n, 100_000);
        assert!(!c.record_points());
    }
}

//! Experiment configuration documents.
//!
//! A config is a flat JSON object. Unknown keys are rejected and
//! `schema_version` must match [`SCHEMA_VERSION`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bcast_a5::Model;
use bcast_core::estimators::FlipRate;
use bcast_core::rational::parse_rational;
use bcast_core::Rational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    KsScan,
    NoiseScan,
    A5Accuracy,
    EquivalenceSuite,
    GadgetCorpus,
    ReductionDemo,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::KsScan,
        ExperimentKind::NoiseScan,
        ExperimentKind::A5Accuracy,
        ExperimentKind::EquivalenceSuite,
        ExperimentKind::GadgetCorpus,
        ExperimentKind::ReductionDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::KsScan => "ks-scan",
            ExperimentKind::NoiseScan => "noise-scan",
            ExperimentKind::A5Accuracy => "a5-accuracy",
            ExperimentKind::EquivalenceSuite => "equivalence-suite",
            ExperimentKind::GadgetCorpus => "gadget-corpus",
            ExperimentKind::ReductionDemo => "reduction-demo",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}, expected csv or json"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Majority,
    LinearizedBp,
    Bp,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::Majority, EstimatorKind::LinearizedBp, EstimatorKind::Bp];
}

impl FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(EstimatorKind::Majority),
            "linearized-bp" | "linearized" => Ok(EstimatorKind::LinearizedBp),
            "bp" | "bp-exact" | "bp-rounding" => Ok(EstimatorKind::Bp),
            _ => Err(Error::Config(format!("unknown estimator {s:?}"))),
        }
    }
}

/// Rejection thresholds used by every statistical assertion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Chi-square rejection level.
    pub alpha: f64,
    /// Allowed deviation in standard errors.
    pub stderr_band: f64,
    /// Smallest trial count for an asserted statistic.
    pub min_trials: u64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { alpha: 0.001, stderr_band: 3.0, min_trials: 100 }
    }
}

/// Test fixture for the equivalence suite: one generator runs with a
/// shifted `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corruption {
    /// `path-product` or `restrictions`.
    pub generator: String,
    pub theta_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,

    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub d: Vec<u32>,
    #[serde(default)]
    pub s: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: u64,

    /// Empty means all three.
    #[serde(default)]
    pub estimators: Vec<EstimatorKind>,
    /// `exact`, `lemma-bound`, `estimated:<n>` or a number.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip_rate: Option<String>,

    #[serde(default)]
    pub models: Vec<Model>,
    /// Diagonal threshold for recursive reconstruction, e.g. `"1/5"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<String>,

    #[serde(default = "default_formulas")]
    pub formulas: usize,
    #[serde(default = "default_vars")]
    pub vars: usize,
    #[serde(default = "default_max_gates")]
    pub max_gates: usize,
    #[serde(default = "default_max_depth")]
    pub max_depth: u32,
    /// Step of the one-level bound grid; `None` skips the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,

    #[serde(default = "default_word_length")]
    pub word_length: usize,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_advantage")]
    pub advantage: f64,
    #[serde(default = "default_detection_trials")]
    pub detection_trials: u64,

    /// Asserted lower bound on accuracy (a5-accuracy, reduction-demo).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_accuracy: Option<f64>,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Fill `wall_ms`; off by default so outputs are byte-stable.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrupt: Option<Corruption>,
}

fn default_trials() -> u64 {
    1000
}
fn default_formulas() -> usize {
    20
}
fn default_vars() -> usize {
    8
}
fn default_max_gates() -> usize {
    24
}
fn default_max_depth() -> u32 {
    5
}
fn default_word_length() -> usize {
    64
}
fn default_instances() -> usize {
    20
}
fn default_advantage() -> f64 {
    0.1
}
fn default_detection_trials() -> u64 {
    1000
}

/// Exact value of a grid entry read as the decimal it prints as, so `0.9`
/// means 9/10.
pub fn decimal(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::Config(format!("{x} is not a finite number")));
    }
    Ok(parse_rational(&format!("{x}"))?)
}

impl ExperimentConfig {
    /// Empty grids and default scalars.
    pub fn new(experiment: ExperimentKind, seed: u64) -> Self {
        serde_json::from_value(serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "experiment": experiment,
            "seed": seed,
        }))
        .expect("minimal config deserializes")
    }

    pub fn from_json_str(src: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn estimators(&self) -> Vec<EstimatorKind> {
        if self.estimators.is_empty() {
            EstimatorKind::ALL.to_vec()
        } else {
            self.estimators.clone()
        }
    }

    pub fn flip_rate(&self) -> Result<FlipRate> {
        match &self.flip_rate {
            None => Ok(FlipRate::Exact),
            Some(s) => Ok(s.parse()?),
        }
    }

    pub fn tau(&self) -> Result<Rational> {
        match &self.tau {
            None => Ok(bcast_a5::reconstruct::default_tau()),
            Some(s) => Ok(parse_rational(s)?),
        }
    }

    /// Checks everything a run needs, before any work is done.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} is not {SCHEMA_VERSION}", self.schema_version));
        }
        let t = &self.thresholds;
        if !(t.alpha > 0.0 && t.alpha < 1.0) || !(t.stderr_band > 0.0) {
            return bad("thresholds need 0 < alpha < 1 and stderr_band > 0".into());
        }
        let need = |name: &str, empty: bool| -> Result<()> {
            if empty {
                Err(Error::Config(format!("{} needs a non-empty {name} grid", self.experiment)))
            } else {
                Ok(())
            }
        };
        let enough = |name: &str, n: u64| -> Result<()> {
            if n < t.min_trials {
                Err(Error::Config(format!("{name} = {n} is below the minimum of {}", t.min_trials)))
            } else {
                Ok(())
            }
        };
        let theta_range = |lo: f64| -> Result<()> {
            for &th in &self.theta {
                if !(lo..=1.0).contains(&th) {
                    return Err(Error::Config(format!("theta = {th} outside [{lo}, 1]")));
                }
                decimal(th)?;
            }
            Ok(())
        };
        if let Some(&k) = self.k.iter().find(|&&k| k == 0) {
            return bad(format!("arity k = {k} must be positive"));
        }
        if let Some(a) = self.min_accuracy {
            if !(0.0..=1.0).contains(&a) {
                return bad(format!("min_accuracy {a} outside [0, 1]"));
            }
        }
        match self.experiment {
            ExperimentKind::KsScan => {
                need("k", self.k.is_empty())?;
                need("theta", self.theta.is_empty())?;
                need("d", self.d.is_empty())?;
                theta_range(-1.0)?;
                if self.d.contains(&0) {
                    return bad("ks-scan needs d >= 1".into());
                }
                enough("trials", self.trials)?;
                self.flip_rate()?;
            }
            ExperimentKind::NoiseScan => {
                need("k", self.k.is_empty())?;
                need("theta", self.theta.is_empty())?;
                need("d", self.d.is_empty())?;
                need("s", self.s.is_empty())?;
                theta_range(-1.0)?;
                for &s in &self.s {
                    if !(0.0..=0.5).contains(&s) {
                        return bad(format!("noise rate s = {s} outside [0, 1/2]"));
                    }
                    decimal(s)?;
                }
                enough("trials", self.trials)?;
            }
            ExperimentKind::A5Accuracy => {
                need("models", self.models.is_empty())?;
                need("k", self.k.is_empty())?;
                need("d", self.d.is_empty())?;
                if self.k.iter().any(|&k| k < 2) {
                    return bad("a5-accuracy needs k >= 2".into());
                }
                enough("trials", self.trials)?;
                self.tau()?;
            }
            ExperimentKind::EquivalenceSuite => {
                need("k", self.k.is_empty())?;
                need("theta", self.theta.is_empty())?;
                need("d", self.d.is_empty())?;
                theta_range(0.0)?;
                enough("trials", self.trials)?;
                if let Some(c) = &self.corrupt {
                    if c.generator != "path-product" && c.generator != "restrictions" {
                        return bad(format!("cannot corrupt generator {:?}", c.generator));
                    }
                    decimal(c.theta_offset)?;
                }
            }
            ExperimentKind::GadgetCorpus => {
                if self.formulas == 0 || self.vars == 0 || self.vars > 20 {
                    return bad("gadget-corpus needs formulas >= 1 and 1 <= vars <= 20".into());
                }
                if self.max_depth > 6 {
                    return bad(format!("max_depth {} exceeds 6", self.max_depth));
                }
            }
            ExperimentKind::ReductionDemo => {
                need("k", self.k.is_empty())?;
                need("d", self.d.is_empty())?;
                if self.k.iter().any(|&k| k < 2) {
                    return bad("reduction-demo needs k >= 2".into());
                }
                if self.word_length == 0 || self.instances == 0 {
                    return bad("reduction-demo needs word_length >= 1 and instances >= 1".into());
                }
                enough("trials", self.trials)?;
                enough("detection_trials", self.detection_trials)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_errors() {
        let src =
            r#"{"schema_version": 1, "experiment": "ks-scan", "k": [2], "theta": [0.5], "d": [3], "trails": 200}"#;
        assert!(matches!(ExperimentConfig::from_json_str(src), Err(Error::Config(_))));
    }

    #[test]
    fn grids_and_trials_are_checked() {
        let ok = r#"{"schema_version": 1, "experiment": "ks-scan", "k": [2], "theta": [0.5], "d": [3], "trials": 200}"#;
        let cfg = ExperimentConfig::from_json_str(ok).unwrap();
        assert_eq!(cfg.estimators().len(), 3);
        let empty = ok.replace("\"k\": [2]", "\"k\": []");
        assert!(ExperimentConfig::from_json_str(&empty).is_err());
        let few = ok.replace("200", "50");
        assert!(ExperimentConfig::from_json_str(&few).is_err());
        let version = ok.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(ExperimentConfig::from_json_str(&version).is_err());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(decimal(0.9).unwrap(), bcast_core::rational::rat(9, 10));
        assert!(decimal(f64::NAN).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::NoiseScan, 4);
        cfg.k = vec![2];
        cfg.theta = vec![0.9];
        cfg.d = vec![1, 2];
        cfg.s = vec![0.0, 0.5];
        let back = ExperimentConfig::from_json_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }
}

//! Experiment configuration: one TOML file, flat keys plus a few sections.

use std::path::{Path, PathBuf};

use levytree_core::gwgen::OffspringLaw;
use levytree_core::mechanism::BranchingMechanism;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ConfigError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registry name of the experiment.
    #[serde(default)]
    pub kind: String,
    #[serde(default = "defaults::n")]
    pub n: usize,
    #[serde(default = "defaults::replicas")]
    pub replicas: usize,
    /// Rate parameter of the edge marks.
    #[serde(default = "defaults::beta")]
    pub beta: f64,
    #[serde(default = "defaults::thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "BranchingMechanism::brownian")]
    pub mechanism: BranchingMechanism,
    #[serde(default = "defaults::offspring")]
    pub offspring: OffspringLaw,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub cuts: CutsConfig,
    #[serde(default)]
    pub test: TestConfig,
    #[serde(default)]
    pub zmoments: ZMomentsConfig,
    /// Tree JSON to mark instead of sampling Galton-Watson trees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_tree: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    /// Length of one discrete edge; calibrated from pilot trees when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_scale: Option<f64>,
    #[serde(default)]
    pub node_mass_scale: f64,
    #[serde(default = "defaults::pilot_reps")]
    pub pilot_reps: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            edge_scale: None,
            node_mass_scale: 0.0,
            pilot_reps: defaults::pilot_reps(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutShape {
    #[default]
    Gw,
    Path,
    Star,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutsConfig {
    #[serde(default)]
    pub shape: CutShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            alpha: defaults::alpha(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZMomentsConfig {
    #[serde(default = "defaults::max_order")]
    pub max_order: u32,
}

impl Default for ZMomentsConfig {
    fn default() -> Self {
        ZMomentsConfig {
            max_order: defaults::max_order(),
        }
    }
}

mod defaults {
    use super::*;

    pub fn n() -> usize {
        1000
    }
    pub fn replicas() -> usize {
        100
    }
    pub fn beta() -> f64 {
        0.5
    }
    pub fn thresholds() -> Vec<f64> {
        vec![0.1, 0.05, 0.02]
    }
    pub fn output_dir() -> PathBuf {
        PathBuf::from("levytree-out")
    }
    pub fn offspring() -> OffspringLaw {
        OffspringLaw::Poisson
    }
    pub fn pilot_reps() -> usize {
        200
    }
    pub fn alpha() -> f64 {
        0.01
    }
    pub fn max_order() -> u32 {
        5
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, CliError> {
        toml::from_str(s).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks shared by every experiment. Returns every problem found, each
    /// tagged with its field.
    pub fn validate_common(&self) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        let mut bad = |field: &str, reason: String| errs.push(ConfigError::new(field, reason));
        if self.replicas < 1 {
            bad("replicas", format!("must be >= 1, got {}", self.replicas));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            bad(
                "beta",
                format!("must be finite and >= 0, got {}", self.beta),
            );
        }
        if let Some(e) = self
            .thresholds
            .iter()
            .find(|e| !(**e > 0.0 && e.is_finite()))
        {
            bad("thresholds", format!("must be positive, got {e}"));
        }
        if self.thresholds.windows(2).any(|w| w[0] <= w[1]) {
            bad("thresholds", "must be strictly descending".into());
        }
        if let Some(s) = self.scaling.edge_scale {
            if !(s > 0.0 && s.is_finite()) {
                bad("scaling.edge_scale", format!("must be positive, got {s}"));
            }
        }
        if !(self.scaling.node_mass_scale >= 0.0 && self.scaling.node_mass_scale.is_finite()) {
            bad(
                "scaling.node_mass_scale",
                format!("must be >= 0, got {}", self.scaling.node_mass_scale),
            );
        }
        if !(self.test.alpha > 0.0 && self.test.alpha < 1.0) {
            bad(
                "test.alpha",
                format!("must lie in (0, 1), got {}", self.test.alpha),
            );
        }
        if let Err(e) = self.offspring.build() {
            bad("offspring", e.to_string());
        }
        errs
    }

    /// Tree experiments need at least one edge.
    pub fn require_tree_size(&self, errs: &mut Vec<ConfigError>) {
        if self.n < 2 {
            errs.push(ConfigError::new(
                "n",
                format!("must be >= 2 for tree experiments, got {}", self.n),
            ));
        }
    }

    /// The mark rate has to agree with the mechanism that normalizes the
    /// comparison.
    pub fn require_brownian(&self, errs: &mut Vec<ConfigError>) {
        if !self.mechanism.is_brownian() {
            errs.push(ConfigError::new(
                "mechanism",
                "must be the Brownian mechanism (alpha = 0, beta = 0.5, no Levy part)",
            ));
        }
        if self.beta != self.mechanism.beta() {
            errs.push(ConfigError::new(
                "beta",
                format!(
                    "must equal mechanism.beta = {}, got {}",
                    self.mechanism.beta(),
                    self.beta
                ),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_sections() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            kind = "theorem31"
            n = 4000
            thresholds = [0.1, 0.05]

            [mechanism]
            alpha = 0.0
            beta = 0.5
            levy = "none"

            [offspring]
            kind = "geometric"

            [scaling]
            edge_scale = 0.02
            "#,
        )
        .unwrap();
        assert_eq!(c.n, 4000);
        assert_eq!(c.replicas, 100);
        assert_eq!(c.offspring, OffspringLaw::Geometric);
        assert_eq!(c.scaling.edge_scale, Some(0.02));
        assert_eq!(c.scaling.pilot_reps, 200);
        assert!(c.validate_common().is_empty());
        assert_eq!(
            ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap(),
            c
        );
    }

    #[test]
    fn stable_mechanism_and_law() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            [mechanism]
            alpha = 0.0
            beta = 0.0
            levy = { stable = { c0 = 1.0, gamma = 1.5 } }

            [offspring]
            kind = "stable_tail"
            gamma = 1.5
            n_max = 1000
            "#,
        )
        .unwrap();
        assert_eq!(c.mechanism.stable_index(), Some((1.5, 1.0)));
    }

    #[test]
    fn field_level_errors() {
        let mut c = ExperimentConfig {
            replicas: 0,
            ..Default::default()
        };
        c.thresholds = vec![0.01, 0.1];
        c.test.alpha = 2.0;
        let fields: Vec<String> = c.validate_common().into_iter().map(|e| e.field).collect();
        assert_eq!(fields, ["replicas", "thresholds", "test.alpha"]);
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("[scaling]\nedge = 1").is_err());
    }
}

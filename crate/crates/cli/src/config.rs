//! Experiment configuration.
//!
//! A TOML file with `[scenario]`, `[env]`, `[sac]`, `[eval]`, `[oracle]` and
//! an optional `[sweep]` section. Every field has a default, so an empty file
//! is the full-scale setting.

use std::fmt;
use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use uavmec_core::{DecodingMode, EnvOptions, ScenarioConfig};
use uavmec_learn::train::{eval_seeds, test_seeds};
use uavmec_learn::SacConfig;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Learned placement and resource split.
    Sac,
    /// Learned agent with service placement frozen at reset.
    Fsp,
    /// Learned agent with UAV CPU divided equally among users.
    Era,
    /// Uniform random actions.
    Random,
}

impl Mode {
    pub fn decoding(self) -> DecodingMode {
        match self {
            Mode::Sac | Mode::Random => DecodingMode::Learned,
            Mode::Fsp => DecodingMode::FixedPlacement,
            Mode::Era => DecodingMode::EqualShare,
        }
    }

    pub fn is_learned(self) -> bool {
        self != Mode::Random
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sac => "sac",
            Mode::Fsp => "fsp",
            Mode::Era => "era",
            Mode::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    /// Deterministic evaluation episodes per run.
    pub episodes: usize,
    /// Evaluate on seeds never used during training; when false, reuse the
    /// trainer's evaluation seeds so logged returns can be reproduced.
    pub held_out: bool,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            episodes: 10,
            held_out: true,
        }
    }
}

impl EvalSettings {
    pub fn seeds(&self) -> Vec<u64> {
        if self.held_out {
            test_seeds(self.episodes)
        } else {
            eval_seeds(self.episodes)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    /// Frozen slots to solve.
    pub slots: usize,
    /// Relative gap counted as "close to the optimum".
    pub tolerance: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            slots: 50,
            tolerance: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted path of the swept field, e.g. `scenario.users`.
    pub axis: String,
    pub values: Vec<toml::Value>,
    #[serde(default = "default_sweep_modes")]
    pub modes: Vec<Mode>,
}

fn default_sweep_modes() -> Vec<Mode> {
    vec![Mode::Sac]
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub env: EnvOptions,
    pub sac: SacConfig,
    pub eval: EvalSettings,
    pub oracle: OracleSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|source| HarnessError::ConfigParse {
            path: origin.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|source| HarnessError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    /// Ties the trainer's episode length to the scenario horizon and checks
    /// every section.
    pub fn resolved(mut self) -> Result<Self, HarnessError> {
        self.sac.episode_len = self.scenario.horizon;
        self.scenario.validate()?;
        self.sac.validate()?;
        if self.eval.episodes == 0 {
            return Err(HarnessError::Invalid("eval.episodes must be positive".into()));
        }
        if !(self.oracle.tolerance.is_finite() && self.oracle.tolerance >= 0.0) {
            return Err(HarnessError::Invalid("oracle.tolerance must be non-negative".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() || sweep.modes.is_empty() {
                return Err(HarnessError::Invalid("sweep needs at least one value and one mode".into()));
            }
            for v in &sweep.values {
                self.with_field(&sweep.axis, v.clone())?;
            }
        }
        Ok(self)
    }

    /// The configuration for one run: mode applied to the decoder, seed to the trainer.
    pub fn for_run(&self, mode: Mode, seed: u64) -> Self {
        let mut cfg = self.clone();
        cfg.env.mode = mode.decoding();
        cfg.sac.seed = seed;
        cfg
    }

    /// Copy with the field at dotted `path` replaced by `value`.
    pub fn with_field(&self, path: &str, value: toml::Value) -> Result<Self, HarnessError> {
        let mut base = self.clone();
        base.sweep = None;
        let mut tree = toml::Value::try_from(&base).map_err(|e| HarnessError::Invalid(e.to_string()))?;
        let mut node = &mut tree;
        let keys: Vec<&str> = path.split('.').collect();
        for (i, key) in keys.iter().enumerate() {
            let table = node
                .as_table_mut()
                .ok_or_else(|| HarnessError::Invalid(format!("sweep axis `{path}` does not name a config field")))?;
            let slot = table
                .get_mut(*key)
                .ok_or_else(|| HarnessError::Invalid(format!("sweep axis `{path}` does not name a config field")))?;
            if i + 1 == keys.len() {
                *slot = value.clone();
            }
            node = slot;
        }
        let mut cfg: ExperimentConfig = tree
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Invalid(format!("sweep value {value} for `{path}`: {e}")))?;
        cfg.sweep = self.sweep.clone();
        cfg.sac.episode_len = cfg.scenario.horizon;
        cfg.scenario.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, HarnessError> {
        ExperimentConfig::from_toml_str(text, Path::new("inline.toml"))
    }

    #[test]
    fn empty_file_is_the_full_scale_default() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.scenario.users, 20);
        assert_eq!(cfg.scenario.uavs, 5);
        assert_eq!(cfg.sac.buffer_capacity, 20_000);
    }

    #[test]
    fn sections_override_defaults() {
        let cfg = parse("[scenario]\nusers = 5\n[sac]\nhidden = [32, 32]\n[env]\nmode = \"equal_share\"\n").unwrap();
        assert_eq!(cfg.scenario.users, 5);
        assert_eq!(cfg.sac.hidden, vec![32, 32]);
        assert_eq!(cfg.env.mode, DecodingMode::EqualShare);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(parse("[scenario]\nuserz = 5\n"), Err(HarnessError::ConfigParse { .. })));
    }

    #[test]
    fn resolution_ties_episode_length_to_horizon() {
        let cfg = parse("[scenario]\nhorizon = 30\n").unwrap().resolved().unwrap();
        assert_eq!(cfg.sac.episode_len, 30);
    }

    #[test]
    fn with_field_sets_nested_values() {
        let cfg = ExperimentConfig::default();
        let out = cfg.with_field("scenario.uavs", toml::Value::Integer(3)).unwrap();
        assert_eq!(out.scenario.uavs, 3);
        let out = cfg
            .with_field("scenario.channel.user_bandwidth", toml::Value::Float(2.0e6))
            .unwrap();
        assert_eq!(out.scenario.channel.user_bandwidth, 2.0e6);
    }

    #[test]
    fn unknown_axis_fails_validation() {
        let text = "[sweep]\naxis = \"scenario.drones\"\nvalues = [2, 3]\n";
        let err = parse(text).unwrap().resolved().unwrap_err();
        assert!(matches!(err, HarnessError::Invalid(_)), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn ill_typed_sweep_value_fails_validation() {
        let text = "[sweep]\naxis = \"scenario.users\"\nvalues = [\"many\"]\n";
        assert!(parse(text).unwrap().resolved().is_err());
    }

    #[test]
    fn shipped_profiles_parse() {
        let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        for name in ["desk.toml", "full.toml"] {
            ExperimentConfig::load(&root.join(name)).unwrap().resolved().unwrap();
        }
    }

    #[test]
    fn modes_map_to_decoders() {
        assert_eq!(Mode::Fsp.decoding(), DecodingMode::FixedPlacement);
        assert_eq!(Mode::Era.decoding(), DecodingMode::EqualShare);
        assert_eq!(Mode::Random.decoding(), DecodingMode::Learned);
        let cfg = ExperimentConfig::default().for_run(Mode::Era, 7);
        assert_eq!(cfg.env.mode, DecodingMode::EqualShare);
        assert_eq!(cfg.sac.seed, 7);
    }
}

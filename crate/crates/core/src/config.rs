//! Run configuration: a single TOML document with model, calculus, battery,
//! tolerance and output sections. Unknown keys are rejected.

use crate::report::Tolerance;
use crate::scalar::Backend;
use crate::symbols::CalcCtx;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelCfg {
    /// Fourier modes `-mode_cutoff..mode_cutoff` for matrix realisations.
    pub mode_cutoff: usize,
    /// Depth of the `1/n` diagonal expansions.
    pub asym_order: usize,
    /// Euler–Maclaurin correction depth.
    pub em_depth: usize,
    pub backend: Backend,
}

impl Default for ModelCfg {
    fn default() -> Self {
        ModelCfg {
            mode_cutoff: 256,
            asym_order: 12,
            em_depth: 12,
            backend: Backend::Float,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalculusCfg {
    /// Default expansion truncation `N`.
    pub trunc: u32,
    /// Deep truncation for finite-part-sensitive commutator checks.
    pub deep_trunc: u32,
    /// Coefficient jet length in the family variable (`K+1`).
    pub jet_len: usize,
    /// Lie-series depth for logarithm differences.
    pub ch_depth: u32,
    /// Pole multiplicity bound `k` asserted of the model.
    pub pole_bound: u32,
    /// Truncation of perturbation expansions `(|D|+P)^{-z}`.
    pub pert_trunc: u32,
    pub max_word_len: usize,
    pub max_delta: u32,
    pub max_log: u32,
}

impl Default for CalculusCfg {
    fn default() -> Self {
        CalculusCfg {
            trunc: 8,
            deep_trunc: 26,
            jet_len: 7,
            ch_depth: 4,
            pole_bound: 0,
            pert_trunc: 6,
            max_word_len: 12,
            max_delta: 40,
            max_log: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatteryCfg {
    pub seed: u64,
    /// Number of generated residue-identity families.
    pub families: usize,
    /// Which suites `all` runs, in order.
    pub suites: Vec<String>,
}

impl Default for BatteryCfg {
    fn default() -> Self {
        BatteryCfg {
            seed: 42,
            families: 12,
            suites: crate::suites::SUITE_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolCfg {
    pub rel: f64,
    pub abs: f64,
}

impl Default for TolCfg {
    fn default() -> Self {
        TolCfg {
            rel: 1e-6,
            abs: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputCfg {
    pub report: PathBuf,
}

impl Default for OutputCfg {
    fn default() -> Self {
        OutputCfg {
            report: PathBuf::from("report.json"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelCfg,
    pub calculus: CalculusCfg,
    pub battery: BatteryCfg,
    pub tolerances: TolCfg,
    pub output: OutputCfg,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = toml::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError::Invalid(m));
        if self.model.mode_cutoff == 0 {
            return err("model.mode_cutoff must be positive".into());
        }
        if self.model.asym_order < 4 {
            return err("model.asym_order must be at least 4".into());
        }
        if self.model.em_depth == 0 || self.model.em_depth > 15 {
            return err("model.em_depth must be in 1..=15".into());
        }
        if self.calculus.trunc < 2 || self.calculus.deep_trunc < self.calculus.trunc {
            return err("calculus truncations must satisfy 2 <= trunc <= deep_trunc".into());
        }
        if self.calculus.jet_len < 2 {
            return err("calculus.jet_len must be at least 2".into());
        }
        if self.calculus.pert_trunc < 2 {
            return err("calculus.pert_trunc must be at least 2".into());
        }
        if !(self.tolerances.rel > 0.0) || !(self.tolerances.abs > 0.0) {
            return err("tolerances must be positive (override with --tol for forced runs)".into());
        }
        for s in &self.battery.suites {
            if !crate::suites::SUITE_NAMES.contains(&s.as_str()) {
                return err(format!(
                    "unknown suite '{s}' (known: {})",
                    crate::suites::SUITE_NAMES.join(", ")
                ));
            }
        }
        if self.battery.families == 0 {
            return err("battery.families must be positive".into());
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.tolerances.rel, self.tolerances.abs)
    }

    pub fn calc_ctx(&self) -> CalcCtx {
        CalcCtx {
            jet_len: self.calculus.jet_len,
            max_word_len: self.calculus.max_word_len,
            max_delta: self.calculus.max_delta,
            max_log: self.calculus.max_log,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = "[model]\nmode_cutoff = 8\nnot_a_key = 3\n";
        let r: Result<RunConfig, _> = toml::from_str(bad);
        let msg = format!("{}", r.unwrap_err());
        assert!(msg.contains("not_a_key"), "{msg}");
    }

    #[test]
    fn zero_tolerance_in_file_is_rejected() {
        let bad = "[tolerances]\nrel = 0.0\nabs = 0.0\n";
        let cfg: RunConfig = toml::from_str(bad).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn roundtrip_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        back.validate().unwrap();
        assert_eq!(back.battery.seed, cfg.battery.seed);
    }
}

//! Run configuration files.
//!
//! A flat `key = value` file (TOML syntax). Every key is optional:
//!
//! ```text
//! eta = 1.0
//! crop_ratio = 0.5
//! lambda1 = 0.5
//! lambda2 = 0.5
//! prob = 0.7
//! seed = 0
//! crop_mode = "random"          # or "centered"
//! pairing = "cross-domain-train" # or "unlabeled-pool"
//! workers = 4
//! resid_ceiling = 0.15
//! ```
//!
//! Unknown keys are rejected so a typo like `lamda1` cannot pass silently.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixing::{CropMode, MixParams, Mixer, DEFAULT_RESIDUE_CEILING};
use crate::sampler::PairingStrategy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub eta: f64,
    pub crop_ratio: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub prob: f64,
    pub seed: u64,
    pub crop_mode: CropMode,
    pub pairing: PairingStrategy,
    pub workers: usize,
    pub resid_ceiling: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = MixParams::default();
        RunConfig {
            eta: p.eta,
            crop_ratio: p.crop_ratio,
            lambda1: p.lambda1,
            lambda2: p.lambda2,
            prob: p.prob,
            seed: 0,
            crop_mode: CropMode::default(),
            pairing: PairingStrategy::default(),
            workers: 1,
            resid_ceiling: DEFAULT_RESIDUE_CEILING,
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> MixParams {
        MixParams {
            eta: self.eta,
            crop_ratio: self.crop_ratio,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            prob: self.prob,
        }
    }

    pub fn set_params(&mut self, p: MixParams) {
        self.eta = p.eta;
        self.crop_ratio = p.crop_ratio;
        self.lambda1 = p.lambda1;
        self.lambda2 = p.lambda2;
        self.prob = p.prob;
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if self.workers == 0 {
            return Err(Error::ConfigRange {
                field: "workers",
                value: "0".into(),
                expected: ">= 1",
            });
        }
        if !(self.resid_ceiling.is_finite() && self.resid_ceiling > 0.0) {
            return Err(Error::ConfigRange {
                field: "resid_ceiling",
                value: self.resid_ceiling.to_string(),
                expected: "> 0",
            });
        }
        Ok(())
    }

    /// Mixer for this configuration (mix mode left at its default).
    pub fn mixer(&self) -> Result<Mixer> {
        self.validate()?;
        Ok(Mixer::new(self.params())?
            .with_crop_mode(self.crop_mode)
            .with_residue_ceiling(self.resid_ceiling))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_toml_str(&text).map_err(|e| match e {
        Error::ConfigParse(m) => Error::ConfigParse(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_names_field() {
        match RunConfig::from_toml_str("eta = 1.5") {
            Err(Error::ConfigRange { field, .. }) => assert_eq!(field, "eta"),
            other => panic!("unexpected {other:?}"),
        }
        let err = RunConfig::from_toml_str("lambda2 = -0.1").unwrap_err();
        assert!(err.to_string().contains("lambda2"));
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = RunConfig::from_toml_str("seed = 9\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.params(), MixParams::default());
        assert_eq!(cfg.crop_mode, CropMode::Random);
        assert_eq!(cfg.pairing, PairingStrategy::CrossDomainTrain);
        assert_eq!(cfg.resid_ceiling, 0.15);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = RunConfig::from_toml_str("lamda1 = 0.3").unwrap_err();
        assert!(matches!(err, Error::ConfigParse(_)));
        assert!(err.to_string().contains("lamda1"), "{err}");
    }

    #[test]
    fn malformed_and_enum_values() {
        assert!(RunConfig::from_toml_str("eta = ").is_err());
        let cfg = RunConfig::from_toml_str("crop_mode = \"centered\"\npairing = \"unlabeled-pool\"").unwrap();
        assert_eq!(cfg.crop_mode, CropMode::Centered);
        assert_eq!(cfg.pairing, PairingStrategy::UnlabeledPool);
        assert!(RunConfig::from_toml_str("crop_mode = \"middle\"").is_err());
        assert!(RunConfig::from_toml_str("workers = 0").is_err());
    }

    #[test]
    fn loads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, "lambda1 = 0.25\nworkers = 3\n").unwrap();
        let cfg = load_config(&p).unwrap();
        assert_eq!(cfg.lambda1, 0.25);
        assert_eq!(cfg.workers, 3);
        assert!(load_config(dir.path().join("missing.toml")).is_err());
    }
}

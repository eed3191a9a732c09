//! Run configuration shared by every CLI command.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adr::WeightingConfig;
use crate::cost::CostConfig;
use crate::nms::NmsConfig;
use crate::ocd::NoiseConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub cost: CostConfig,
    pub noise: NoiseConfig,
    pub adr: WeightingConfig,
    pub nms: NmsConfig,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.cost.validate().map_err(|e| invalid(&e))?;
        self.noise.validate().map_err(|e| invalid(&e))?;
        self.adr.validate().map_err(|e| invalid(&e))?;
        self.nms.validate().map_err(|e| invalid(&e))?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: "<string>".into(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: shown.clone(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            ConfigError::Parse { msg, .. } => ConfigError::Parse { path: shown, msg },
            other => other,
        })
    }
}

//! Service configuration, read from TOML.
//!
//! ```toml
//! corpus = "fixtures/micro/manifest.json"
//! photo_root = "photos"            # optional, for GET /api/photos/{id}
//! listen = "127.0.0.1:8080"        # overridden by PHOTOTRAIL_LISTEN
//! session_ttl_secs = 3600
//!
//! [pipeline]                       # any PipelineParams field
//! threshold = 0.1
//!
//! [spots]                          # any SpotParams field
//! limit = 20
//!
//! [provider]
//! name = "fixture"                 # or "remote" (needs the `remote` feature)
//! fixtures = "fixtures/providers"
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use phototrail_core::params::ParamError;
use phototrail_core::{PipelineParams, SpotParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LISTEN_ENV: &str = "PHOTOTRAIL_LISTEN";
pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";
pub const DEFAULT_SESSION_TTL_SECS: u64 = 3600;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    #[serde(default = "ProviderConfig::default_name")]
    pub name: String,
    #[serde(default = "ProviderConfig::default_fixtures")]
    pub fixtures: PathBuf,
}

impl ProviderConfig {
    pub const FIXTURE: &'static str = "fixture";
    pub const REMOTE: &'static str = "remote";

    fn default_name() -> String {
        Self::FIXTURE.into()
    }

    fn default_fixtures() -> PathBuf {
        PathBuf::from("fixtures/providers")
    }
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            name: Self::default_name(),
            fixtures: Self::default_fixtures(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub corpus: PathBuf,
    pub photo_root: Option<PathBuf>,
    pub listen: String,
    pub session_ttl_secs: u64,
    pub pipeline: PipelineParams,
    pub spots: SpotParams,
    pub provider: ProviderConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            corpus: PathBuf::from("manifest.json"),
            photo_root: None,
            listen: DEFAULT_LISTEN.into(),
            session_ttl_secs: DEFAULT_SESSION_TTL_SECS,
            pipeline: PipelineParams::default(),
            spots: SpotParams::default(),
            provider: ProviderConfig::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Load a config file, resolve its relative paths and apply the
    /// listen-address environment override.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        config.apply_env();
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.corpus);
        join(&mut self.provider.fixtures);
        if let Some(root) = &mut self.photo_root {
            join(root);
        }
    }

    pub fn apply_env(&mut self) {
        if let Ok(listen) = std::env::var(LISTEN_ENV) {
            if !listen.trim().is_empty() {
                self.listen = listen.trim().to_string();
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.pipeline.validate()?;
        self.spots.validate()?;
        if self.session_ttl_secs == 0 {
            return Err(ConfigError::Invalid("session_ttl_secs must be >= 1".into()));
        }
        if ![ProviderConfig::FIXTURE, ProviderConfig::REMOTE].contains(&self.provider.name.as_str()) {
            return Err(ConfigError::Invalid(format!(
                "unknown provider `{}`, expected fixture or remote",
                self.provider.name
            )));
        }
        Ok(())
    }
}

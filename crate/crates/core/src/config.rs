//! Settings resolution: command-line flag, then environment variable, then
//! config file, then built-in default.
//!
//! The config file is TOML with flat keys:
//!
//! ```toml
//! api_base = "https://api.openai.com/v1"
//! api_key = "sk-..."
//! model = "gpt-4"
//! temperature = 0.0
//! cache_dir = ".factsim-cache"
//! encoder = "remote"            # or "test"
//! encoder_model = "sentence-transformers/distiluse-base-multilingual-cased-v1"
//! encoder_api_base = "http://localhost:8080/v1"
//! rendering = "joined"          # or a template with {subject} and {description}
//! max_inflight = 4
//! threshold = 0.75
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

pub const ENV_API_BASE: &str = "FACTSIM_API_BASE";
pub const ENV_API_KEY: &str = "FACTSIM_API_KEY";
pub const ENV_CACHE_DIR: &str = "FACTSIM_CACHE_DIR";
pub const ENV_ENCODER_API_BASE: &str = "FACTSIM_ENCODER_API_BASE";
pub const ENV_ENCODER_MODEL: &str = "FACTSIM_ENCODER_MODEL";

pub const DEFAULT_API_BASE: &str = "https://api.openai.com/v1";
pub const DEFAULT_ENCODER_MODEL: &str =
    "sentence-transformers/distiluse-base-multilingual-cased-v1";
pub const DEFAULT_CONFIG_FILE: &str = "factsim.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    #[default]
    Test,
    Remote,
}

impl std::str::FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "test" => Ok(EncoderKind::Test),
            "remote" => Ok(EncoderKind::Remote),
            _ => Err(Error::invalid(format!(
                "encoder must be 'test' or 'remote' (got {s:?})"
            ))),
        }
    }
}

/// Every setting as optional; used for the file layer and for flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialSettings {
    pub api_base: Option<String>,
    pub api_key: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub cache_dir: Option<PathBuf>,
    pub encoder: Option<EncoderKind>,
    pub encoder_model: Option<String>,
    pub encoder_api_base: Option<String>,
    pub rendering: Option<String>,
    pub max_inflight: Option<usize>,
    pub threshold: Option<f64>,
}

impl PartialSettings {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            line: e
                .span()
                .map(|s| text[..s.start].matches('\n').count() + 1)
                .unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    pub fn from_env(get: impl Fn(&str) -> Option<String>) -> Self {
        let get = |k: &str| get(k).filter(|v| !v.is_empty());
        PartialSettings {
            api_base: get(ENV_API_BASE),
            api_key: get(ENV_API_KEY),
            cache_dir: get(ENV_CACHE_DIR).map(PathBuf::from),
            encoder_api_base: get(ENV_ENCODER_API_BASE),
            encoder_model: get(ENV_ENCODER_MODEL),
            ..Default::default()
        }
    }

    /// Fills every unset field of `self` from `lower`.
    pub fn or(self, lower: PartialSettings) -> PartialSettings {
        PartialSettings {
            api_base: self.api_base.or(lower.api_base),
            api_key: self.api_key.or(lower.api_key),
            model: self.model.or(lower.model),
            temperature: self.temperature.or(lower.temperature),
            cache_dir: self.cache_dir.or(lower.cache_dir),
            encoder: self.encoder.or(lower.encoder),
            encoder_model: self.encoder_model.or(lower.encoder_model),
            encoder_api_base: self.encoder_api_base.or(lower.encoder_api_base),
            rendering: self.rendering.or(lower.rendering),
            max_inflight: self.max_inflight.or(lower.max_inflight),
            threshold: self.threshold.or(lower.threshold),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub api_base: String,
    pub api_key: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub cache_dir: Option<PathBuf>,
    pub encoder: EncoderKind,
    pub encoder_model: String,
    pub encoder_api_base: String,
    pub rendering: String,
    pub max_inflight: usize,
    pub threshold: f64,
}

impl Settings {
    /// Layers flags over environment over file over defaults.
    pub fn resolve(
        flags: PartialSettings,
        env: PartialSettings,
        file: PartialSettings,
    ) -> Result<Self> {
        let p = flags.or(env).or(file);
        let api_base = p.api_base.unwrap_or_else(|| DEFAULT_API_BASE.to_string());
        let s = Settings {
            encoder_api_base: p.encoder_api_base.unwrap_or_else(|| api_base.clone()),
            api_base,
            api_key: p.api_key,
            model: p
                .model
                .unwrap_or_else(|| crate::extraction::DEFAULT_MODEL.to_string()),
            temperature: p.temperature.unwrap_or(0.0),
            cache_dir: p.cache_dir,
            encoder: p.encoder.unwrap_or_default(),
            encoder_model: p
                .encoder_model
                .unwrap_or_else(|| DEFAULT_ENCODER_MODEL.to_string()),
            rendering: p.rendering.unwrap_or_else(|| "joined".to_string()),
            max_inflight: p.max_inflight.unwrap_or(4),
            threshold: p.threshold.unwrap_or(crate::explain::DEFAULT_THRESHOLD),
        };
        if !(s.temperature >= 0.0 && s.temperature.is_finite()) {
            return Err(Error::invalid(format!(
                "temperature {} must be >= 0",
                s.temperature
            )));
        }
        if s.max_inflight == 0 {
            return Err(Error::invalid("max_inflight must be at least 1"));
        }
        if !(s.threshold > 0.0 && s.threshold <= 1.0) {
            return Err(Error::invalid(format!(
                "threshold {} outside (0, 1]",
                s.threshold
            )));
        }
        Ok(s)
    }
}

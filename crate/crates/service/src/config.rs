use std::fs;
use std::path::{Path, PathBuf};

use persq_core::feedback::Catalog;
use persq_core::ingest::UserSeries;
use persq_core::model::{ModelConfig, TrainConfig};
use persq_core::patterns::{default_thresholds, ThresholdConfig, DEFAULT_MIN_SUPPORT};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Optimizer and architecture settings shared by `train`, `evaluate` and `serve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub early_stop_patience: Option<usize>,
    pub validation_fraction: f64,
    pub hidden_sizes: Vec<usize>,
    pub dropout_rate: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let train = TrainConfig::default();
        let model = ModelConfig::default();
        TrainSettings {
            learning_rate: train.learning_rate,
            epochs: train.epochs,
            batch_size: train.batch_size,
            early_stop_patience: train.early_stop_patience,
            validation_fraction: train.validation_fraction,
            hidden_sizes: model.hidden_sizes,
            dropout_rate: model.dropout_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub bind: String,
    pub port: u16,
    /// Origins allowed by CORS; `"*"` allows any.
    pub cors_origins: Vec<String>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind: "127.0.0.1".into(),
            port: 8080,
            cors_origins: vec!["http://localhost:5173".into()],
        }
    }
}

/// Paths and settings for every command. Relative paths are resolved
/// against the directory of the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub dataset_dir: PathBuf,
    pub model_path: PathBuf,
    pub output_dir: PathBuf,
    pub thresholds_path: Option<PathBuf>,
    pub catalog_path: Option<PathBuf>,
    pub min_support_fraction: f64,
    pub window_t: usize,
    pub seed: u64,
    pub train: TrainSettings,
    pub server: ServerConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            dataset_dir: "dataset".into(),
            model_path: "model.json".into(),
            output_dir: "out".into(),
            thresholds_path: None,
            catalog_path: None,
            min_support_fraction: DEFAULT_MIN_SUPPORT,
            window_t: 3,
            seed: 7,
            train: TrainSettings::default(),
            server: ServerConfig::default(),
        }
    }
}

impl AppConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: AppConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = AppConfig::from_toml_str(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })?;
        if let Some(base) = path.parent() {
            config.rebase(base);
        }
        Ok(config)
    }

    /// The file at `path` if given, otherwise the defaults.
    pub fn resolve(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            Some(p) => AppConfig::load(p),
            None => Ok(AppConfig::default()),
        }
    }

    fn rebase(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.dataset_dir);
        join(&mut self.model_path);
        join(&mut self.output_dir);
        if let Some(p) = self.thresholds_path.as_mut() {
            join(p);
        }
        if let Some(p) = self.catalog_path.as_mut() {
            join(p);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(self.min_support_fraction > 0.0 && self.min_support_fraction <= 1.0) {
            return invalid(format!(
                "min_support_fraction must be in (0, 1], got {}",
                self.min_support_fraction
            ));
        }
        if self.server.port == 0 {
            return invalid("server.port must be in 1..=65535".into());
        }
        if self.server.bind.trim().is_empty() {
            return invalid("server.bind must not be empty".into());
        }
        self.model_config(self.window_t)
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.train_config(self.seed)
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    /// Checks that the inputs needed to serve are present.
    pub fn check_paths(&self) -> Result<(), ConfigError> {
        let mut required = vec![&self.dataset_dir];
        required.extend(self.thresholds_path.as_ref());
        required.extend(self.catalog_path.as_ref());
        match required.into_iter().find(|p| !p.exists()) {
            Some(p) => Err(ConfigError::Invalid(format!(
                "{} does not exist",
                p.display()
            ))),
            None => Ok(()),
        }
    }

    pub fn model_config(&self, window_t: usize) -> ModelConfig {
        ModelConfig {
            hidden_sizes: self.train.hidden_sizes.clone(),
            dropout_rate: self.train.dropout_rate,
            window_t,
            seed: self.seed,
            ..ModelConfig::default()
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.train.learning_rate,
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            seed,
            early_stop_patience: self.train.early_stop_patience,
            validation_fraction: self.train.validation_fraction,
            ..TrainConfig::default()
        }
    }

    /// Default quantile thresholds with the configured overrides applied.
    pub fn thresholds(
        &self,
        dataset: &[UserSeries],
        overrides: Option<&Path>,
    ) -> Result<ThresholdConfig, ConfigError> {
        let mut thresholds =
            default_thresholds(dataset).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(path) = overrides.or(self.thresholds_path.as_deref()) {
            let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            thresholds
                .apply_overrides(&text)
                .map_err(|e| ConfigError::Parse {
                    path: path.to_path_buf(),
                    message: e.to_string(),
                })?;
        }
        Ok(thresholds)
    }

    pub fn catalog(&self) -> Result<Catalog, ConfigError> {
        match &self.catalog_path {
            Some(path) => Catalog::load(path).map_err(|e| ConfigError::Parse {
                path: path.clone(),
                message: e.to_string(),
            }),
            None => Ok(Catalog::default()),
        }
    }
}

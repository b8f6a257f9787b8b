use std::collections::BTreeMap;
use std::fs;
use std::sync::Arc;

use persq_core::feedback::{Catalog, FeedbackEngine};
use persq_core::ingest::{read_dataset, UserSeries};
use persq_core::model::{Checkpoint, SqPredictor};
use persq_core::patterns::{mine_all, write_patterns, PatternSets, ThresholdConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{AppConfig, ConfigError};

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("model {path}: {message}")]
    Model { path: String, message: String },
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the canonical CSV rendering of a pattern set.
pub fn patterns_digest(patterns: &PatternSets) -> String {
    let mut out = Vec::new();
    write_patterns(&mut out, patterns).expect("writing to memory cannot fail");
    sha256_hex(&out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Versions {
    pub model: Option<String>,
    pub model_kind: Option<String>,
    pub patterns: Option<String>,
    pub users: usize,
}

/// Everything the service answers from, fixed at startup.
pub struct Snapshot {
    users: BTreeMap<String, UserSeries>,
    thresholds: ThresholdConfig,
    patterns: Option<PatternSets>,
    engine: Option<FeedbackEngine>,
    versions: Versions,
}

impl Snapshot {
    /// `model` pairs a predictor with its version string.
    pub fn new(
        dataset: Vec<UserSeries>,
        thresholds: ThresholdConfig,
        patterns: Option<PatternSets>,
        catalog: Catalog,
        model: Option<(Arc<dyn SqPredictor>, String)>,
    ) -> Self {
        let versions = Versions {
            model: model.as_ref().map(|(_, v)| v.clone()),
            model_kind: model.as_ref().map(|(m, _)| m.name().to_string()),
            patterns: patterns.as_ref().map(patterns_digest),
            users: dataset.len(),
        };
        let engine = model.map(|(model, _)| FeedbackEngine {
            model,
            patterns: patterns.clone().unwrap_or_default(),
            thresholds: thresholds.clone(),
            catalog,
        });
        Snapshot {
            users: dataset
                .into_iter()
                .map(|s| (s.user_id().to_string(), s))
                .collect(),
            thresholds,
            patterns,
            engine,
            versions,
        }
    }

    /// Reads the dataset, mines patterns and loads the model named in
    /// `config`. A missing model file leaves the snapshot without one.
    pub fn load(config: &AppConfig) -> Result<Self, SnapshotError> {
        config.check_paths()?;
        let dataset =
            read_dataset(&config.dataset_dir).map_err(|e| SnapshotError::Dataset(e.to_string()))?;
        if dataset.is_empty() {
            return Err(SnapshotError::Dataset(format!(
                "{} holds no users",
                config.dataset_dir.display()
            )));
        }
        let thresholds = config.thresholds(&dataset, None)?;
        let patterns = match mine_all(&dataset, &thresholds, config.min_support_fraction) {
            Ok(outcome) => Some(outcome.patterns),
            Err(e) => {
                log::warn!("patterns not loaded: {e}");
                None
            }
        };
        let catalog = config.catalog()?;
        let model = if config.model_path.is_file() {
            let path = config.model_path.display().to_string();
            let err = |message: String| SnapshotError::Model {
                path: path.clone(),
                message,
            };
            let bytes = fs::read(&config.model_path).map_err(|e| err(e.to_string()))?;
            let text = String::from_utf8(bytes).map_err(|e| err(e.to_string()))?;
            let predictor = Checkpoint::from_json(&text)
                .and_then(Checkpoint::into_predictor)
                .map_err(|e| err(e.to_string()))?;
            Some((Arc::from(predictor), sha256_hex(text.as_bytes())))
        } else {
            log::warn!(
                "no model at {}; prediction endpoints answer 409",
                config.model_path.display()
            );
            None
        };
        Ok(Snapshot::new(dataset, thresholds, patterns, catalog, model))
    }

    pub fn user(&self, user_id: &str) -> Option<&UserSeries> {
        self.users.get(user_id)
    }

    pub fn thresholds(&self) -> &ThresholdConfig {
        &self.thresholds
    }

    pub fn patterns(&self) -> Option<&PatternSets> {
        self.patterns.as_ref()
    }

    pub fn engine(&self) -> Option<&FeedbackEngine> {
        self.engine.as_ref()
    }

    pub fn versions(&self) -> &Versions {
        &self.versions
    }
}

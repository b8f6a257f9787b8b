use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FeedbackError;
use crate::patterns::MINED_VARIABLES;

const DEFAULT_CATALOG: &str = include_str!("../../data/feedback_catalog.toml");

/// Feedback message per mined variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Catalog(pub BTreeMap<String, String>);

impl Catalog {
    pub fn from_toml_str(text: &str) -> Result<Self, FeedbackError> {
        let catalog: Catalog =
            toml::from_str(text).map_err(|e| FeedbackError::Catalog(e.to_string()))?;
        if let Some((k, _)) = catalog.0.iter().find(|(_, m)| m.trim().is_empty()) {
            return Err(FeedbackError::Catalog(format!("empty message for {k}")));
        }
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self, FeedbackError> {
        let text = fs::read_to_string(path)
            .map_err(|e| FeedbackError::Io(path.display().to_string(), e))?;
        Catalog::from_toml_str(&text)
    }

    /// Mined variables the catalog has no message for.
    pub fn uncovered(&self) -> Vec<&'static str> {
        MINED_VARIABLES
            .iter()
            .map(|(n, _)| *n)
            .filter(|n| !self.0.contains_key(*n))
            .collect()
    }

    pub fn message(&self, variable: &str) -> String {
        self.0
            .get(variable)
            .cloned()
            .unwrap_or_else(|| format!("consider improving {variable}"))
    }
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::from_toml_str(DEFAULT_CATALOG).expect("bundled catalog is valid")
    }
}

//! Day-level feature encoding (min-max scaling plus one-hot categoricals)
//! and the carry-over windows fed to the regressors.

mod encode;
mod scaler;
mod window;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use encode::{encode, encode_series, EncodedDay, EncodedSeries};
pub use scaler::{default_categories, fit_scaler, inverse_transform_sq, Range, Scaler};
pub use window::{window, window_dataset, WindowLength, WindowedSample, MAX_MODEL_WINDOW};

use crate::ingest::Variable;

/// Min-max scaled features: the 16 per-day variables and age.
pub const NUMERIC_FEATURES: [&str; 17] = [
    "calories",
    "distance",
    "steps",
    "sedentary_min",
    "lightly_min",
    "moderately_min",
    "very_min",
    "zone0_min",
    "zone1_min",
    "zone2_min",
    "zone3_min",
    "fatigue",
    "mood",
    "readiness",
    "soreness",
    "stress",
    "age",
];

/// Column order of every [`FeatureVector`]: activity block, wellness block,
/// then demographics (age, gender one-hot, chronotype one-hot).
pub const FEATURE_NAMES: [&str; 21] = [
    "calories",
    "distance",
    "steps",
    "sedentary_min",
    "lightly_min",
    "moderately_min",
    "very_min",
    "zone0_min",
    "zone1_min",
    "zone2_min",
    "zone3_min",
    "fatigue",
    "mood",
    "readiness",
    "soreness",
    "stress",
    "age",
    "gender_male",
    "gender_female",
    "chronotype_A",
    "chronotype_B",
];

pub const FEATURE_WIDTH: usize = FEATURE_NAMES.len();

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot fit a scaler on an empty dataset")]
    EmptyDataset,
    #[error("{date}: missing modeled variable {variable}")]
    MissingVariable { variable: Variable, date: NaiveDate },
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("unknown category {category:?} for {variable}")]
    UnknownCategory { variable: String, category: String },
    #[error("scaler has no sleep-quality range (fitted on data without targets)")]
    Unfitted,
    #[error("invalid scaler: {0}")]
    InvalidScaler(String),
    #[error("invalid window length {0}: must be non-negative")]
    WindowLength(i64),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}

/// A fixed-width vector of normalized features in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Option<Self> {
        (values.len() == FEATURE_WIDTH && values.iter().all(|v| (0.0..=1.0).contains(v)))
            .then_some(FeatureVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn schema() -> &'static [&'static str] {
        &FEATURE_NAMES
    }

    pub fn get(&self, feature: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == feature)
            .map(|i| self.0[i])
    }
}

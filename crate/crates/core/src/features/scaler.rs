use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureError, NUMERIC_FEATURES};
use crate::ingest::{Chronotype, Gender, UserSeries, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn is_constant(&self) -> bool {
        self.max <= self.min
    }

    fn widen(range: &mut Option<Range>, x: f64) {
        match range {
            Some(r) => {
                r.min = r.min.min(x);
                r.max = r.max.max(x);
            }
            None => *range = Some(Range { min: x, max: x }),
        }
    }
}

/// Min-max ranges per numeric feature, one-hot category lists, and the
/// sleep-quality range used to map targets to and from `[0, 1]`.
///
/// Serialized with fixed keys (`numeric`, `categorical`, `sq`,
/// `constant_features`) so saved models stay portable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub numeric: BTreeMap<String, Range>,
    pub categorical: BTreeMap<String, Vec<String>>,
    pub sq: Option<Range>,
    #[serde(default)]
    pub constant_features: Vec<String>,
}

pub fn default_categories() -> BTreeMap<String, Vec<String>> {
    BTreeMap::from([
        (
            "gender".to_string(),
            vec![
                Gender::Male.as_str().to_string(),
                Gender::Female.as_str().to_string(),
            ],
        ),
        (
            "chronotype".to_string(),
            vec![
                Chronotype::A.as_str().to_string(),
                Chronotype::B.as_str().to_string(),
            ],
        ),
    ])
}

/// Fits min-max ranges on every present value of the dataset.
///
/// Features whose minimum equals their maximum (or that never occur) are
/// listed in `constant_features` and always encode to 0.
pub fn fit_scaler(dataset: &[UserSeries]) -> Result<Scaler, FeatureError> {
    if dataset.is_empty() {
        return Err(FeatureError::EmptyDataset);
    }
    let mut ranges: BTreeMap<&'static str, Option<Range>> =
        NUMERIC_FEATURES.iter().map(|n| (*n, None)).collect();
    let mut sq = None;
    for series in dataset {
        if let Some(r) = ranges.get_mut("age") {
            Range::widen(r, f64::from(series.profile().age));
        }
        for day in series.days() {
            for variable in Variable::MODELED {
                if let (Some(x), Some(r)) = (day.get(variable), ranges.get_mut(variable.column())) {
                    Range::widen(r, x);
                }
            }
            if let Some(x) = day.sq {
                Range::widen(&mut sq, x);
            }
        }
    }

    let mut constant_features = Vec::new();
    let numeric = ranges
        .into_iter()
        .map(|(name, range)| {
            let range = range.unwrap_or(Range { min: 0.0, max: 0.0 });
            if range.is_constant() {
                constant_features.push(name.to_string());
            }
            (name.to_string(), range)
        })
        .collect();
    constant_features.sort();
    if !constant_features.is_empty() {
        log::warn!(
            "constant features encoded as 0: {}",
            constant_features.join(", ")
        );
    }
    Ok(Scaler {
        numeric,
        categorical: default_categories(),
        sq,
        constant_features,
    })
}

impl Scaler {
    pub fn range(&self, feature: &str) -> Result<Range, FeatureError> {
        self.numeric
            .get(feature)
            .copied()
            .ok_or_else(|| FeatureError::UnknownFeature(feature.to_string()))
    }

    /// `(x - min) / (max - min)` clamped to `[0, 1]`; constant features map to 0.
    pub fn scale(&self, feature: &str, x: f64) -> Result<f64, FeatureError> {
        let r = self.range(feature)?;
        if r.is_constant() {
            return Ok(0.0);
        }
        Ok(((x - r.min) / (r.max - r.min)).clamp(0.0, 1.0))
    }

    pub fn one_hot(&self, variable: &str, category: &str) -> Result<Vec<f64>, FeatureError> {
        let categories = self
            .categorical
            .get(variable)
            .ok_or_else(|| FeatureError::UnknownFeature(variable.to_string()))?;
        if !categories.iter().any(|c| c == category) {
            return Err(FeatureError::UnknownCategory {
                variable: variable.to_string(),
                category: category.to_string(),
            });
        }
        Ok(categories
            .iter()
            .map(|c| if c == category { 1.0 } else { 0.0 })
            .collect())
    }

    pub fn sq_range(&self) -> Result<Range, FeatureError> {
        self.sq.ok_or(FeatureError::Unfitted)
    }

    /// Maps a sleep-quality percentage into the normalized target space.
    /// Not clamped, so that it inverts exactly.
    pub fn forward_scale_sq(&self, sq: f64) -> Result<f64, FeatureError> {
        let r = self.sq_range()?;
        if r.is_constant() {
            return Ok(0.0);
        }
        Ok((sq - r.min) / (r.max - r.min))
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        for name in NUMERIC_FEATURES {
            let r = self.range(name)?;
            if !(r.min <= r.max) {
                return Err(FeatureError::InvalidScaler(format!("{name}: min > max")));
            }
        }
        for (variable, expected) in default_categories() {
            let categories = self.categorical.get(&variable).ok_or_else(|| {
                FeatureError::InvalidScaler(format!("missing categories for {variable}"))
            })?;
            let mut seen = categories.clone();
            seen.sort();
            seen.dedup();
            if categories.is_empty()
                || seen.len() != categories.len()
                || categories.len() != expected.len()
            {
                return Err(FeatureError::InvalidScaler(format!(
                    "categories for {variable} must be {expected:?} without duplicates"
                )));
            }
        }
        if let Some(r) = self.sq {
            if !(r.min <= r.max) {
                return Err(FeatureError::InvalidScaler("sq: min > max".into()));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), FeatureError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| FeatureError::InvalidScaler(e.to_string()))?;
        fs::write(path, text).map_err(|e| FeatureError::Io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Scaler, FeatureError> {
        let text = fs::read_to_string(path)
            .map_err(|e| FeatureError::Io(path.display().to_string(), e))?;
        let scaler: Scaler =
            serde_json::from_str(&text).map_err(|e| FeatureError::InvalidScaler(e.to_string()))?;
        scaler.validate()?;
        Ok(scaler)
    }
}

/// Maps a normalized prediction back to percent and clamps it to `[0, 100]`.
pub fn inverse_transform_sq(normalized: f64, scaler: &Scaler) -> Result<f64, FeatureError> {
    let r = scaler.sq_range()?;
    Ok((normalized * (r.max - r.min) + r.min).clamp(0.0, 100.0))
}

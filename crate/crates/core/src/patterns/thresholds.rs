use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::items::{Level, SqGroup, MINED_VARIABLES};
use super::PatternError;
use crate::ingest::UserSeries;

/// Share of days placed in the low sleep-quality group by default.
pub const SQ_LOW_FRACTION: f64 = 251.0 / 1571.0;
/// Share of days placed in the high sleep-quality group by default.
pub const SQ_HIGH_FRACTION: f64 = 322.0 / 1571.0;

/// Cut points per mined variable and for sleep quality.
///
/// Stored as flat TOML: `numsteps = [5200.0, 9100.0]` per variable plus
/// `sq = [82.0, 93.5]`. An empty list marks a single-level variable that is
/// left out of transactions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub sq: Vec<f64>,
    #[serde(flatten)]
    pub variables: BTreeMap<String, Vec<f64>>,
}

#[derive(Deserialize)]
struct PartialThresholds {
    sq: Option<Vec<f64>>,
    #[serde(flatten)]
    variables: BTreeMap<String, Vec<f64>>,
}

fn check_cuts(name: &str, cuts: &[f64]) -> Result<(), PatternError> {
    if cuts.len() > 2 {
        return Err(PatternError::Thresholds(format!(
            "{name}: at most two cut points, got {}",
            cuts.len()
        )));
    }
    if cuts.iter().any(|c| !c.is_finite()) {
        return Err(PatternError::Thresholds(format!(
            "{name}: non-finite cut point"
        )));
    }
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PatternError::Thresholds(format!(
            "{name}: cut points must be strictly increasing"
        )));
    }
    Ok(())
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<(), PatternError> {
        check_cuts("sq", &self.sq)?;
        for (name, _) in MINED_VARIABLES.iter().filter(|(_, v)| v.is_continuous()) {
            let cuts = self
                .variables
                .get(*name)
                .ok_or_else(|| PatternError::Thresholds(format!("no cut points for {name}")))?;
            check_cuts(name, cuts)?;
        }
        if let Some(extra) = self.variables.keys().find(|k| {
            !MINED_VARIABLES
                .iter()
                .any(|(n, v)| n == k && v.is_continuous())
        }) {
            return Err(PatternError::Thresholds(format!(
                "unknown variable {extra:?}"
            )));
        }
        Ok(())
    }

    pub fn cuts(&self, variable: &str) -> Option<&[f64]> {
        self.variables.get(variable).map(Vec::as_slice)
    }

    pub fn level(&self, variable: &str, x: f64) -> Option<Level> {
        self.cuts(variable)
            .filter(|c| !c.is_empty())
            .map(|c| Level::from_cuts(x, c))
    }

    pub fn sq_group(&self, sq: f64) -> SqGroup {
        SqGroup::from_level(Level::from_cuts(sq, &self.sq))
    }

    /// Replaces cut points with those listed in a (possibly partial) TOML
    /// override document.
    pub fn apply_overrides(&mut self, toml_text: &str) -> Result<(), PatternError> {
        let partial: PartialThresholds =
            toml::from_str(toml_text).map_err(|e| PatternError::Thresholds(e.to_string()))?;
        if let Some(sq) = partial.sq {
            self.sq = sq;
        }
        self.variables.extend(partial.variables);
        self.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self, PatternError> {
        let config: ThresholdConfig =
            toml::from_str(text).map_err(|e| PatternError::Thresholds(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String, PatternError> {
        toml::to_string(self).map_err(|e| PatternError::Thresholds(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PatternError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PatternError::Io(path.display().to_string(), e))?;
        ThresholdConfig::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), PatternError> {
        fs::write(path, self.to_toml_string()?)
            .map_err(|e| PatternError::Io(path.display().to_string(), e))
    }
}

/// Linear-interpolation quantile (Hyndman–Fan type 7) of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&p) {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Two cut points at quantiles `p1 < p2`. Ties are broken by moving the
/// upper cut to the next distinct value; if there is none, one cut remains.
/// Constant or absent data yields no cuts.
fn quantile_cuts(mut values: Vec<f64>, p1: f64, p2: f64) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let (Some(first), Some(last)) = (values.first(), values.last()) else {
        return Vec::new();
    };
    if first == last {
        return Vec::new();
    }
    let c1 = quantile(&values, p1).expect("non-empty");
    let c2 = quantile(&values, p2).expect("non-empty");
    if c2 > c1 {
        return vec![c1, c2];
    }
    match values.iter().find(|v| **v > c1) {
        Some(next) => vec![c1, *next],
        None => vec![c1],
    }
}

/// Tercile cut points per mined variable and sleep-quality cuts that
/// reproduce the low/normal/high proportions 251/998/322.
pub fn default_thresholds(dataset: &[UserSeries]) -> Result<ThresholdConfig, PatternError> {
    if dataset.is_empty() {
        return Err(PatternError::Argument(
            "cannot derive thresholds from an empty dataset".into(),
        ));
    }
    let days = || dataset.iter().flat_map(|s| s.days());
    let mut variables = BTreeMap::new();
    for (name, variable) in MINED_VARIABLES.iter().filter(|(_, v)| v.is_continuous()) {
        let values: Vec<f64> = days().filter_map(|d| variable.value(d)).collect();
        let cuts = quantile_cuts(values, 1.0 / 3.0, 2.0 / 3.0);
        if cuts.is_empty() {
            log::warn!("{name} is constant or absent; it is excluded from mined itemsets");
        }
        variables.insert(name.to_string(), cuts);
    }
    let sq_values: Vec<f64> = days().filter_map(|d| d.sq).collect();
    let mut sq = quantile_cuts(sq_values.clone(), SQ_LOW_FRACTION, 1.0 - SQ_HIGH_FRACTION);
    if sq.is_empty() {
        sq = sq_values.first().map(|v| vec![*v]).unwrap_or_default();
    }
    let config = ThresholdConfig { sq, variables };
    config.validate()?;
    Ok(config)
}

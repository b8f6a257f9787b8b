use super::ModelError;
use crate::features::{FeatureVector, Scaler, WindowedSample, FEATURE_NAMES};

/// One-hot columns left out of the flat input so that, together with the
/// intercept, the design matrix is not rank deficient by construction.
const REFERENCE_LEVELS: [&str; 2] = ["gender_female", "chronotype_B"];

/// Width of [`flatten`] output: target-day features minus reference
/// levels, plus the previous night's sleep quality.
pub const FLAT_WIDTH: usize = FEATURE_NAMES.len() - REFERENCE_LEVELS.len() + 1;

/// Single-day input of the baselines with a normalized target.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSample {
    pub x: Vec<f64>,
    pub target: f64,
}

/// Mean previous-night sleep quality over training samples, in percent,
/// used wherever a sample lacks it. Falls back to the mean target.
pub fn prev_sq_fill(samples: &[WindowedSample]) -> Result<f64, ModelError> {
    if samples.is_empty() {
        return Err(ModelError::Argument("no training samples".into()));
    }
    let known: Vec<f64> = samples.iter().filter_map(|s| s.prev_sq).collect();
    let pool: Vec<f64> = if known.is_empty() {
        samples.iter().map(|s| s.target_sq).collect()
    } else {
        known
    };
    Ok(pool.iter().sum::<f64>() / pool.len() as f64)
}

/// Target-day features followed by the normalized previous-night SQ.
pub fn flatten(
    today: &FeatureVector,
    prev_sq: Option<f64>,
    fill: f64,
    scaler: &Scaler,
) -> Result<Vec<f64>, ModelError> {
    let mut x: Vec<f64> = FEATURE_NAMES
        .iter()
        .zip(today.values())
        .filter(|(name, _)| !REFERENCE_LEVELS.contains(name))
        .map(|(_, v)| *v)
        .collect();
    let prev = scaler.forward_scale_sq(prev_sq.unwrap_or(fill))?;
    x.push(prev.clamp(0.0, 1.0));
    Ok(x)
}

pub(crate) fn flatten_samples(
    samples: &[WindowedSample],
    fill: f64,
    scaler: &Scaler,
) -> Result<Vec<FlatSample>, ModelError> {
    samples
        .iter()
        .map(|s| {
            Ok(FlatSample {
                x: flatten(s.today(), s.prev_sq, fill, scaler)?,
                target: scaler.forward_scale_sq(s.target_sq)?,
            })
        })
        .collect()
}

pub(crate) fn last_day(window: &[FeatureVector]) -> Result<&FeatureVector, ModelError> {
    window
        .last()
        .ok_or_else(|| ModelError::Shape("window holds no days".into()))
}

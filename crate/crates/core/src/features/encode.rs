use chrono::NaiveDate;

use super::{FeatureError, FeatureVector, Scaler, FEATURE_WIDTH};
use crate::ingest::{DayRecord, UserProfile, UserSeries, Variable};

/// Encodes one day. Demographics are repeated on every day.
pub fn encode(
    record: &DayRecord,
    profile: &UserProfile,
    scaler: &Scaler,
) -> Result<FeatureVector, FeatureError> {
    let mut values = Vec::with_capacity(FEATURE_WIDTH);
    for variable in Variable::MODELED {
        let x = record.get(variable).ok_or(FeatureError::MissingVariable {
            variable,
            date: record.date,
        })?;
        values.push(scaler.scale(variable.column(), x)?);
    }
    values.push(scaler.scale("age", f64::from(profile.age))?);
    values.extend(scaler.one_hot("gender", profile.gender.as_str())?);
    values.extend(scaler.one_hot("chronotype", profile.chronotype.as_str())?);
    debug_assert_eq!(values.len(), FEATURE_WIDTH);
    Ok(FeatureVector(values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDay {
    pub date: NaiveDate,
    /// `None` when the day lacks a modeled variable.
    pub features: Option<FeatureVector>,
    pub sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSeries {
    pub user_id: String,
    pub days: Vec<EncodedDay>,
}

/// Encodes every recorded day of a series; unencodable days are kept as
/// holes so windowing can skip them.
pub fn encode_series(series: &UserSeries, scaler: &Scaler) -> Result<EncodedSeries, FeatureError> {
    let mut days = Vec::with_capacity(series.days().len());
    for record in series.days() {
        let features = match encode(record, series.profile(), scaler) {
            Ok(v) => Some(v),
            Err(FeatureError::MissingVariable { .. }) => None,
            Err(e) => return Err(e),
        };
        days.push(EncodedDay {
            date: record.date,
            features,
            sq: record.sq,
        });
    }
    Ok(EncodedSeries {
        user_id: series.user_id().to_string(),
        days,
    })
}

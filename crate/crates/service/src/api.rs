//! Request handling independent of the transport. Every function answers
//! from an immutable [`Snapshot`].

use std::collections::BTreeMap;
use std::str::FromStr;

use chrono::NaiveDate;
use persq_core::features::FeatureError;
use persq_core::feedback::{FeedbackEngine, FeedbackError, FeedbackReport};
use persq_core::ingest::{Chronotype, DayRecord, UserProfile, UserSeries, Variable};
use persq_core::patterns::{Pattern, SqGroup};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::snapshot::{Snapshot, Versions};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    NotLoaded(String),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> u16 {
        match self {
            ApiError::BadRequest(_) => 400,
            ApiError::NotFound(_) => 404,
            ApiError::NotLoaded(_) => 409,
            ApiError::Internal(_) => 500,
        }
    }
}

impl From<FeedbackError> for ApiError {
    fn from(e: FeedbackError) -> Self {
        match e {
            FeedbackError::UnknownDate { .. } | FeedbackError::Window(_) => {
                ApiError::NotFound(e.to_string())
            }
            FeedbackError::Feature(FeatureError::MissingVariable { .. }) => {
                ApiError::NotFound(e.to_string())
            }
            other => ApiError::Internal(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub model_loaded: bool,
    pub patterns_loaded: bool,
    pub versions: Versions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub user_id: String,
    pub date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub predicted_sq: f64,
    pub sq_group: SqGroup,
}

/// Hypothetical values for the target day, keyed by dataset column name
/// (`steps`, `mood`, ...) or `chronotype`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfRequest {
    pub user_id: String,
    pub base_date: NaiveDate,
    #[serde(default)]
    pub overrides: BTreeMap<String, serde_json::Value>,
}

pub fn health(snapshot: &Snapshot) -> HealthResponse {
    let model_loaded = snapshot.engine().is_some();
    let patterns_loaded = snapshot.patterns().is_some();
    HealthResponse {
        status: if model_loaded && patterns_loaded {
            "ok"
        } else {
            "degraded"
        }
        .into(),
        model_loaded,
        patterns_loaded,
        versions: snapshot.versions().clone(),
    }
}

/// Patterns of one group, or of every group in low, normal, high order.
pub fn patterns(snapshot: &Snapshot, group: Option<&str>) -> Result<Vec<Pattern>, ApiError> {
    let sets = snapshot
        .patterns()
        .ok_or_else(|| ApiError::NotLoaded("patterns are not loaded".into()))?;
    match group {
        Some(g) => {
            let g = SqGroup::from_str(g).map_err(ApiError::BadRequest)?;
            Ok(sets.get(g).to_vec())
        }
        None => Ok(SqGroup::ALL
            .iter()
            .flat_map(|g| sets.get(*g).iter().cloned())
            .collect()),
    }
}

fn engine(snapshot: &Snapshot) -> Result<&FeedbackEngine, ApiError> {
    snapshot
        .engine()
        .ok_or_else(|| ApiError::NotLoaded("no model is loaded".into()))
}

fn feedback_engine(snapshot: &Snapshot) -> Result<&FeedbackEngine, ApiError> {
    if snapshot.patterns().is_none() {
        return Err(ApiError::NotLoaded("patterns are not loaded".into()));
    }
    engine(snapshot)
}

fn user<'a>(snapshot: &'a Snapshot, user_id: &str) -> Result<&'a UserSeries, ApiError> {
    snapshot
        .user(user_id)
        .ok_or_else(|| ApiError::NotFound(format!("unknown user {user_id}")))
}

pub fn parse_date(raw: &str) -> Result<NaiveDate, ApiError> {
    NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d")
        .map_err(|_| ApiError::BadRequest(format!("invalid date {raw:?}, expected YYYY-MM-DD")))
}

pub fn predict(snapshot: &Snapshot, request: &PredictRequest) -> Result<PredictResponse, ApiError> {
    let engine = engine(snapshot)?;
    let series = user(snapshot, &request.user_id)?;
    let (predicted_sq, sq_group) = engine.predict(series, request.date)?;
    Ok(PredictResponse {
        predicted_sq,
        sq_group,
    })
}

pub fn feedback(
    snapshot: &Snapshot,
    user_id: &str,
    date: NaiveDate,
) -> Result<FeedbackReport, ApiError> {
    let engine = feedback_engine(snapshot)?;
    let series = user(snapshot, user_id)?;
    Ok(engine.report(series, date)?)
}

/// Applies what-if overrides to copies of the target day and profile.
/// Age and gender are immutable; sleep measurements are not inputs.
pub fn apply_overrides(
    day: &mut DayRecord,
    profile: &mut UserProfile,
    overrides: &BTreeMap<String, serde_json::Value>,
) -> Result<(), ApiError> {
    for (name, value) in overrides {
        if name == "chronotype" {
            let raw = value
                .as_str()
                .ok_or_else(|| ApiError::BadRequest("chronotype must be \"A\" or \"B\"".into()))?;
            profile.chronotype = raw.parse::<Chronotype>().map_err(ApiError::BadRequest)?;
            continue;
        }
        if matches!(name.as_str(), "age" | "gender") {
            return Err(ApiError::BadRequest(format!("{name} cannot be changed")));
        }
        let variable = Variable::from_column(name)
            .filter(|v| Variable::MODELED.contains(v))
            .ok_or_else(|| ApiError::BadRequest(format!("{name} is not an adjustable variable")))?;
        let x = value
            .as_f64()
            .ok_or_else(|| ApiError::BadRequest(format!("{name} must be a number")))?;
        day.set(variable, Some(x)).map_err(ApiError::BadRequest)?;
    }
    Ok(())
}

/// The feedback report for the base day with `overrides` applied to it; the
/// previous days of the window are taken as recorded.
pub fn whatif(snapshot: &Snapshot, request: &WhatIfRequest) -> Result<FeedbackReport, ApiError> {
    let engine = feedback_engine(snapshot)?;
    let series = user(snapshot, &request.user_id)?;
    let (mut days, prev_sq) = engine.window_days(series, request.base_date)?;
    let mut profile = series.profile().clone();
    let today = days.last_mut().expect("windows hold the target day");
    apply_overrides(today, &mut profile, &request.overrides)?;
    Ok(engine.report_for_days(&profile, &days, prev_sq)?)
}

//! Personalized lifestyle feedback: predict tonight's sleep quality, match
//! the day against patterns of better-sleeping groups and turn the
//! unmatched parts into suggestions.

mod catalog;
mod rules;

use std::sync::Arc;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{encode, FeatureError};
use crate::ingest::{DayRecord, UserProfile, UserSeries};
use crate::model::{ModelError, SqPredictor};
use crate::patterns::{
    discretize, Item, Pattern, PatternSets, SqGroup, ThresholdConfig, Transaction,
};

pub use catalog::Catalog;
pub use rules::{
    candidate_groups, match_rules, optimizable_params, render_feedback, select_candidate_groups,
    FeedbackItem, MatchResult, UNKNOWN_LEVEL,
};

#[derive(Debug, Error)]
pub enum FeedbackError {
    #[error("user {user_id} has no record for {date}")]
    UnknownDate { user_id: String, date: NaiveDate },
    #[error("invalid window: {0}")]
    Window(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("invalid catalog: {0}")]
    Catalog(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    /// A pattern matched and at least one parameter can be improved.
    Feedback,
    /// The candidate pattern groups are empty.
    NoCandidates,
    /// No candidate shares an item with the day.
    NoMatch,
    /// The day already realizes the matched pattern.
    FullyMatched,
}

/// Every intermediate of a report, enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub user_items: Vec<Item>,
    pub missing_variables: Vec<String>,
    pub candidate_groups: Vec<SqGroup>,
    pub candidate_count: usize,
    pub ranked_matches: Vec<MatchResult>,
    pub optimizable: Vec<FeedbackItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub user_id: String,
    pub target_date: NaiveDate,
    pub predicted_sq: f64,
    pub sq_group: SqGroup,
    pub matched_pattern: Option<Pattern>,
    pub items: Vec<FeedbackItem>,
    pub status: ReportStatus,
    pub audit: Audit,
}

impl FeedbackReport {
    /// Rebuilds the report from its recorded prediction and day items.
    pub fn replay(
        &self,
        patterns: &PatternSets,
        thresholds: &ThresholdConfig,
        catalog: &Catalog,
    ) -> FeedbackReport {
        build_report(
            &self.user_id,
            self.target_date,
            self.predicted_sq,
            self.audit.user_items.iter().cloned().collect(),
            self.audit.missing_variables.clone(),
            patterns,
            thresholds,
            catalog,
        )
    }
}

/// Everything after prediction: grouping, candidate selection, top-1 rule
/// match, optimizable parameters and messages.
#[allow(clippy::too_many_arguments)]
pub fn build_report(
    user_id: &str,
    target_date: NaiveDate,
    predicted_sq: f64,
    user_items: Transaction,
    missing_variables: Vec<String>,
    patterns: &PatternSets,
    thresholds: &ThresholdConfig,
    catalog: &Catalog,
) -> FeedbackReport {
    let sq_group = thresholds.sq_group(predicted_sq);
    let groups = candidate_groups(sq_group);
    let candidates = select_candidate_groups(sq_group, patterns);
    let ranked = match_rules(&user_items, &candidates);
    let matched = ranked.first().map(|m| m.pattern.clone());
    let optimizable = matched
        .as_ref()
        .map(|p| optimizable_params(&user_items, p))
        .unwrap_or_default();
    let items = render_feedback(&optimizable, catalog);
    let status = if candidates.is_empty() {
        ReportStatus::NoCandidates
    } else if matched.is_none() {
        ReportStatus::NoMatch
    } else if items.is_empty() {
        ReportStatus::FullyMatched
    } else {
        ReportStatus::Feedback
    };
    debug_assert!(items.iter().all(rules::is_improvement));
    FeedbackReport {
        user_id: user_id.to_string(),
        target_date,
        predicted_sq,
        sq_group,
        matched_pattern: matched,
        items,
        status,
        audit: Audit {
            user_items: user_items.into_iter().collect(),
            missing_variables,
            candidate_groups: groups,
            candidate_count: candidates.len(),
            ranked_matches: ranked,
            optimizable,
        },
    }
}

/// An immutable bundle of model, patterns, thresholds and messages.
#[derive(Clone)]
pub struct FeedbackEngine {
    pub model: Arc<dyn SqPredictor>,
    pub patterns: PatternSets,
    pub thresholds: ThresholdConfig,
    pub catalog: Catalog,
}

impl FeedbackEngine {
    /// Days `m − t ..= m` of `series` and the sleep quality of night `m − 1`.
    pub fn window_days(
        &self,
        series: &UserSeries,
        date: NaiveDate,
    ) -> Result<(Vec<DayRecord>, Option<f64>), FeedbackError> {
        let t = self.model.window_t();
        let unknown = || FeedbackError::UnknownDate {
            user_id: series.user_id().to_string(),
            date,
        };
        series.day(date).ok_or_else(unknown)?;
        let mut days = Vec::with_capacity(t + 1);
        for back in (0..=t).rev() {
            let d = date
                .checked_sub_days(Days::new(back as u64))
                .and_then(|d| series.day(d))
                .ok_or_else(|| {
                    FeedbackError::Window(format!(
                        "{} lacks day {} of the {}-day window ending {date}",
                        series.user_id(),
                        t + 1 - back,
                        t + 1
                    ))
                })?;
            days.push(d.clone());
        }
        let prev_sq = date
            .checked_sub_days(Days::new(1))
            .and_then(|d| series.day(d))
            .and_then(|d| d.sq);
        Ok((days, prev_sq))
    }

    /// Predicted sleep quality (percent) and its group.
    pub fn predict_days(
        &self,
        profile: &UserProfile,
        days: &[DayRecord],
        prev_sq: Option<f64>,
    ) -> Result<(f64, SqGroup), FeedbackError> {
        let t = self.model.window_t();
        if days.len() != t + 1 {
            return Err(FeedbackError::Window(format!(
                "expected {} days, got {}",
                t + 1,
                days.len()
            )));
        }
        if days
            .windows(2)
            .any(|w| w[0].date.succ_opt() != Some(w[1].date))
        {
            return Err(FeedbackError::Window(
                "window days are not consecutive".into(),
            ));
        }
        let scaler = self
            .model
            .scaler()
            .ok_or_else(|| ModelError::State("model has no fitted scaler attached".into()))?;
        let window = days
            .iter()
            .map(|d| encode(d, profile, scaler))
            .collect::<Result<Vec<_>, _>>()?;
        let sq = self.model.predict_window(&window, prev_sq)?;
        Ok((sq, self.thresholds.sq_group(sq)))
    }

    pub fn predict(
        &self,
        series: &UserSeries,
        date: NaiveDate,
    ) -> Result<(f64, SqGroup), FeedbackError> {
        let (days, prev_sq) = self.window_days(series, date)?;
        self.predict_days(series.profile(), &days, prev_sq)
    }

    /// Full report for explicit window days (oldest first, target day last).
    pub fn report_for_days(
        &self,
        profile: &UserProfile,
        days: &[DayRecord],
        prev_sq: Option<f64>,
    ) -> Result<FeedbackReport, FeedbackError> {
        let (predicted_sq, _) = self.predict_days(profile, days, prev_sq)?;
        let today = days.last().expect("window checked non-empty");
        let discretized = discretize(today, profile, &self.thresholds);
        Ok(build_report(
            &profile.user_id,
            today.date,
            predicted_sq,
            discretized.transaction,
            discretized.missing.iter().map(|s| s.to_string()).collect(),
            &self.patterns,
            &self.thresholds,
            &self.catalog,
        ))
    }

    pub fn report(
        &self,
        series: &UserSeries,
        date: NaiveDate,
    ) -> Result<FeedbackReport, FeedbackError> {
        let (days, prev_sq) = self.window_days(series, date)?;
        self.report_for_days(series.profile(), &days, prev_sq)
    }
}

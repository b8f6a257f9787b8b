//! Lifelog ingestion: parse per-user source files, fold them into daily
//! records, derive the nightly sleep-quality score and drop users whose
//! records lack a required variable altogether.

mod dataset;
mod parse;
pub mod pmdata;
mod record;
mod resample;

use std::path::PathBuf;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

pub use dataset::{read_dataset, write_dataset, DATASET_COLUMNS};
pub use parse::{
    discover_sources, parse_profile, parse_sources, parse_timestamp, RawEntry, RawUserSeries,
    SleepEntry, SourceFiles,
};
pub use record::{Chronotype, DayRecord, Gender, UserProfile, UserSeries, Variable};
pub use resample::resample_daily;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: line {line}, column {column:?}: {message}", file.display())]
    Malformed {
        file: PathBuf,
        line: u64,
        column: String,
        message: String,
    },
    #[error("{}: line {line}, column {column:?}: value out of range: {message}", file.display())]
    Range {
        file: PathBuf,
        line: u64,
        column: String,
        message: String,
    },
    #[error("{}: schema error: {message}", file.display())]
    Schema { file: PathBuf, message: String },
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("record for {date}: {message}")]
    Record { date: NaiveDate, message: String },
    #[error("user {user_id}: dates must be strictly increasing (at {date})")]
    Order { user_id: String, date: NaiveDate },
    #[error("sleep quality undefined: {0}")]
    Domain(String),
    #[error("no users left in the dataset{}", if .0.is_empty() { String::new() } else { format!(" ({})", .0) })]
    EmptyDataset(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Sleep efficiency in percent: `100 * minutes_asleep / time_in_bed`.
pub fn compute_sq(minutes_asleep: f64, time_in_bed: f64) -> Result<f64, IngestError> {
    if !(time_in_bed > 0.0) || !time_in_bed.is_finite() {
        return Err(IngestError::Domain(format!(
            "time_in_bed must be positive, got {time_in_bed}"
        )));
    }
    if !(minutes_asleep >= 0.0) {
        return Err(IngestError::Domain(format!(
            "minutes_asleep must be non-negative, got {minutes_asleep}"
        )));
    }
    if minutes_asleep > time_in_bed {
        return Err(IngestError::Domain(format!(
            "minutes_asleep {minutes_asleep} exceeds time_in_bed {time_in_bed}"
        )));
    }
    Ok(100.0 * minutes_asleep / time_in_bed)
}

/// Variables a user must have recorded at least once to stay in the dataset.
pub const REQUIRED_VARIABLES: [Variable; 18] = Variable::ALL;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub user_id: String,
    pub missing: Vec<Variable>,
}

impl Exclusion {
    pub fn reason(&self) -> String {
        let names: Vec<&str> = self.missing.iter().map(|v| v.column()).collect();
        format!("no record of {} over the whole period", names.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionOutcome {
    pub retained: Vec<UserSeries>,
    pub excluded: Vec<Exclusion>,
}

/// Drops every user that never recorded one of [`REQUIRED_VARIABLES`].
/// Retained series pass through untouched.
pub fn apply_exclusions(all_series: Vec<UserSeries>) -> Result<ExclusionOutcome, IngestError> {
    let mut retained = Vec::with_capacity(all_series.len());
    let mut excluded = Vec::new();
    for series in all_series {
        let missing: Vec<Variable> = REQUIRED_VARIABLES
            .iter()
            .copied()
            .filter(|v| series.days().iter().all(|d| d.get(*v).is_none()))
            .collect();
        if missing.is_empty() {
            retained.push(series);
        } else {
            excluded.push(Exclusion {
                user_id: series.user_id().to_string(),
                missing,
            });
        }
    }
    if retained.is_empty() {
        let detail = excluded
            .iter()
            .map(|e| format!("{}: {}", e.user_id, e.reason()))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(IngestError::EmptyDataset(detail));
    }
    Ok(ExclusionOutcome { retained, excluded })
}

use std::collections::HashMap;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{encode_series, EncodedSeries, FeatureError, FeatureVector, Scaler};
use crate::ingest::UserSeries;

/// Largest number of previous days the regressors are configured for.
pub const MAX_MODEL_WINDOW: usize = 7;

/// Number of previous days `t` in a carry-over window of `t + 1` days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct WindowLength(usize);

impl WindowLength {
    pub fn new(t: i64) -> Result<Self, FeatureError> {
        usize::try_from(t)
            .map(WindowLength)
            .map_err(|_| FeatureError::WindowLength(t))
    }

    pub fn previous_days(self) -> usize {
        self.0
    }

    /// Days per window, `t + 1`.
    pub fn span(self) -> usize {
        self.0 + 1
    }
}

impl From<usize> for WindowLength {
    fn from(t: usize) -> Self {
        WindowLength(t)
    }
}

impl TryFrom<i64> for WindowLength {
    type Error = FeatureError;

    fn try_from(t: i64) -> Result<Self, Self::Error> {
        WindowLength::new(t)
    }
}

impl From<WindowLength> for i64 {
    fn from(t: WindowLength) -> i64 {
        t.0 as i64
    }
}

/// Days `m - t ..= m` of one user with the sleep quality of night `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedSample {
    pub user_id: String,
    pub target_date: NaiveDate,
    pub window: Vec<FeatureVector>,
    pub target_sq: f64,
    /// Sleep quality of night `m - 1`, when recorded. Used by the baselines.
    pub prev_sq: Option<f64>,
}

impl WindowedSample {
    pub fn today(&self) -> &FeatureVector {
        self.window.last().expect("windows hold at least one day")
    }
}

/// One sample per target date whose `t + 1` day run is complete.
///
/// A day counts only if it is recorded and encodable; any hole inside the run
/// drops the sample.
pub fn window(series: &EncodedSeries, t: WindowLength) -> Vec<WindowedSample> {
    let by_date: HashMap<NaiveDate, usize> = series
        .days
        .iter()
        .enumerate()
        .map(|(i, d)| (d.date, i))
        .collect();
    let lookup = |date: NaiveDate| by_date.get(&date).map(|i| &series.days[*i]);

    let mut samples = Vec::new();
    for day in &series.days {
        let Some(target_sq) = day.sq else { continue };
        if day.features.is_none() {
            continue;
        }
        let mut window = Vec::with_capacity(t.span());
        let mut complete = true;
        for back in (0..=t.previous_days()).rev() {
            let features = day
                .date
                .checked_sub_days(Days::new(back as u64))
                .and_then(lookup)
                .and_then(|d| d.features.clone());
            match features {
                Some(f) => window.push(f),
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if !complete {
            continue;
        }
        let prev_sq = day
            .date
            .checked_sub_days(Days::new(1))
            .and_then(lookup)
            .and_then(|d| d.sq);
        samples.push(WindowedSample {
            user_id: series.user_id.clone(),
            target_date: day.date,
            window,
            target_sq,
            prev_sq,
        });
    }
    samples
}

/// Encodes and windows every user of a dataset with one scaler.
pub fn window_dataset(
    dataset: &[UserSeries],
    scaler: &Scaler,
    t: WindowLength,
) -> Result<Vec<WindowedSample>, FeatureError> {
    let mut samples = Vec::new();
    for series in dataset {
        samples.extend(window(&encode_series(series, scaler)?, t));
    }
    Ok(samples)
}

#![allow(dead_code)]

use std::sync::Arc;

use chrono::{Days, NaiveDate};
use persq_core::evaluation::{FoldTrainer, LinearTrainer};
use persq_core::features::{fit_scaler, window_dataset, WindowLength};
use persq_core::feedback::Catalog;
use persq_core::ingest::{Chronotype, DayRecord, Gender, UserProfile, UserSeries};
use persq_core::model::{
    Checkpoint, LinearBaseline, LinearRegression, ModelKind, SqPredictor, CHECKPOINT_VERSION,
    FLAT_WIDTH,
};
use persq_core::patterns::{default_thresholds, mine_all, ThresholdConfig};
use persq_core::synthetic::{carry_over_cohort, CohortConfig};
use persq_service::Snapshot;

/// Cut points that make steps and distance track the sleep-quality group.
pub const STEP_THRESHOLDS: &str =
    "sq = [80.0, 90.0]\nnumsteps = [5000.0, 9000.0]\ndistance = [4.0, 7.0]\n";

pub const START: &str = "2020-03-01";

/// A low-quality night whose day had low steps and distance.
pub const LOW_DAY: &str = "2020-03-11";

/// Two early risers over 30 days. Days cycle through low (SQ 75, 3000
/// steps), normal (SQ 85, 7000 steps) and high (SQ 95, 11000 steps); every
/// other variable is constant.
pub fn step_dataset() -> Vec<UserSeries> {
    let start: NaiveDate = START.parse().unwrap();
    ["u1", "u2"]
        .iter()
        .enumerate()
        .map(|(u, id)| {
            let profile = UserProfile {
                user_id: id.to_string(),
                age: 30 + 10 * u as u32,
                gender: if u == 0 { Gender::Female } else { Gender::Male },
                chronotype: Chronotype::A,
            };
            let days = (0..30u64)
                .map(|k| {
                    let (sq, steps) = match k % 10 {
                        0 | 1 => (75.0, 3000.0),
                        8 | 9 => (95.0, 11000.0),
                        _ => (85.0, 7000.0),
                    };
                    let mut d = DayRecord::empty(start + Days::new(k));
                    d.steps = Some(steps);
                    d.distance = Some(steps * 0.00075);
                    d.calories = Some(2000.0);
                    d.sedentary_min = Some(700.0);
                    d.lightly_active_min = Some(180.0);
                    d.moderately_active_min = Some(20.0);
                    d.very_active_min = Some(15.0);
                    d.hr_zone_min = [Some(1000.0), Some(60.0), Some(20.0), Some(5.0)];
                    d.fatigue = Some(3);
                    d.mood = Some(3);
                    d.readiness = Some(5);
                    d.soreness = Some(2);
                    d.stress = Some(2);
                    d.time_in_bed = Some(480.0);
                    d.minutes_asleep = Some(sq * 4.8);
                    d.refresh_sq().unwrap();
                    d
                })
                .collect();
            UserSeries::new(profile, days).unwrap()
        })
        .collect()
}

pub fn step_thresholds(dataset: &[UserSeries]) -> ThresholdConfig {
    let mut th = default_thresholds(dataset).unwrap();
    th.apply_overrides(STEP_THRESHOLDS).unwrap();
    th
}

/// A linear checkpoint whose every prediction is `sq`.
pub fn constant_checkpoint(dataset: &[UserSeries], sq: f64) -> Checkpoint {
    let scaler = fit_scaler(dataset).unwrap();
    let intercept = scaler.forward_scale_sq(sq).unwrap();
    Checkpoint {
        format_version: CHECKPOINT_VERSION,
        model: ModelKind::Linear(LinearBaseline {
            regression: LinearRegression {
                intercept,
                coefficients: vec![0.0; FLAT_WIDTH],
                ridge_used: false,
            },
            prev_sq_fill: 85.0,
            scaler,
        }),
    }
}

pub fn step_snapshot() -> Snapshot {
    let dataset = step_dataset();
    let thresholds = step_thresholds(&dataset);
    let patterns = mine_all(&dataset, &thresholds, 0.2).unwrap().patterns;
    let model: Arc<dyn SqPredictor> = Arc::from(
        constant_checkpoint(&dataset, 75.0)
            .into_predictor()
            .unwrap(),
    );
    Snapshot::new(
        dataset,
        thresholds,
        Some(patterns),
        Catalog::default(),
        Some((model, "constant".into())),
    )
}

pub fn cohort() -> Vec<UserSeries> {
    carry_over_cohort(&CohortConfig {
        users: 3,
        days: 40,
        ..CohortConfig::default()
    })
}

/// The synthetic cohort served by a linear model fitted on all of it.
pub fn cohort_snapshot() -> Snapshot {
    let dataset = cohort();
    let thresholds = default_thresholds(&dataset).unwrap();
    let patterns = mine_all(&dataset, &thresholds, 0.2).unwrap().patterns;
    let scaler = fit_scaler(&dataset).unwrap();
    let t = WindowLength::new(0).unwrap();
    let samples = window_dataset(&dataset, &scaler, t).unwrap();
    let model: Arc<dyn SqPredictor> = Arc::from(LinearTrainer.train(&samples, &scaler, t).unwrap());
    Snapshot::new(
        dataset,
        thresholds,
        Some(patterns),
        Catalog::default(),
        Some((model, "linear".into())),
    )
}

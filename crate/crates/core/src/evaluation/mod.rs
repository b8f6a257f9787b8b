//! Metrics, leave-one-user-out cross-validation, window-length sweeps and
//! error histograms.

mod cv;
mod histogram;
mod metrics;
mod report;

use thiserror::Error;

use crate::features::FeatureError;
use crate::model::ModelError;

pub use cv::{
    loocv, window_sweep, DayPrediction, FoldResult, FoldTrainer, LinearTrainer, LoocvResult,
    MlpTrainer, PerSqTrainer, SweepPoint,
};
pub use histogram::{error_histogram, HistogramBin, DEFAULT_BIN_WIDTH};
pub use metrics::{compute_metrics, MetricsReport};
pub use report::{write_fold_metrics, write_histogram, write_per_day, write_sweep};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("cross-validation needs at least 2 users, got {0}")]
    TooFewUsers(usize),
    #[error("no fold produced evaluable windows")]
    NoEvaluableFolds,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("writing results: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}

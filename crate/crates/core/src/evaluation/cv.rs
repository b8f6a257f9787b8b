use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, MetricsReport};
use super::EvalError;
use crate::features::{fit_scaler, window_dataset, Scaler, WindowLength, WindowedSample};
use crate::ingest::UserSeries;
use crate::model::{
    LinearBaseline, MlpBaseline, ModelConfig, PerSqModel, SqPredictor, TrainConfig,
};

/// Fits one model family on the training users of a fold.
pub trait FoldTrainer {
    fn name(&self) -> &str;

    fn train(
        &self,
        samples: &[WindowedSample],
        scaler: &Scaler,
        t: WindowLength,
    ) -> Result<Box<dyn SqPredictor>, EvalError>;
}

#[derive(Debug, Clone, Default)]
pub struct PerSqTrainer {
    pub model: ModelConfig,
    pub train: TrainConfig,
}

impl FoldTrainer for PerSqTrainer {
    fn name(&self) -> &str {
        "persq"
    }

    fn train(
        &self,
        samples: &[WindowedSample],
        scaler: &Scaler,
        t: WindowLength,
    ) -> Result<Box<dyn SqPredictor>, EvalError> {
        let config = ModelConfig {
            window_t: t.previous_days(),
            ..self.model.clone()
        };
        let mut model = PerSqModel::init(&config)?.with_scaler(scaler.clone());
        model.train(samples, &self.train)?;
        Ok(Box::new(model))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LinearTrainer;

impl FoldTrainer for LinearTrainer {
    fn name(&self) -> &str {
        "linear"
    }

    fn train(
        &self,
        samples: &[WindowedSample],
        scaler: &Scaler,
        _t: WindowLength,
    ) -> Result<Box<dyn SqPredictor>, EvalError> {
        Ok(Box::new(LinearBaseline::fit(samples, scaler)?))
    }
}

#[derive(Debug, Clone)]
pub struct MlpTrainer {
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
}

impl Default for MlpTrainer {
    fn default() -> Self {
        MlpTrainer {
            hidden: MlpBaseline::DEFAULT_HIDDEN.to_vec(),
            train: TrainConfig::default(),
        }
    }
}

impl FoldTrainer for MlpTrainer {
    fn name(&self) -> &str {
        "mlp"
    }

    fn train(
        &self,
        samples: &[WindowedSample],
        scaler: &Scaler,
        _t: WindowLength,
    ) -> Result<Box<dyn SqPredictor>, EvalError> {
        let (model, _) = MlpBaseline::fit(samples, scaler, &self.hidden, &self.train)?;
        Ok(Box::new(model))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayPrediction {
    pub date: NaiveDate,
    pub truth: f64,
    pub prediction: f64,
}

impl DayPrediction {
    pub fn error(&self) -> f64 {
        self.prediction - self.truth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub held_out_user: String,
    pub metrics: MetricsReport,
    pub per_day: Vec<DayPrediction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoocvResult {
    pub model: String,
    pub window_t: usize,
    pub folds: Vec<FoldResult>,
    /// Metrics over the pooled per-day pairs of every fold.
    pub aggregate: MetricsReport,
    /// Users whose fold had nothing to train on or evaluate.
    pub skipped: Vec<String>,
}

/// Leave-one-user-out cross-validation. Each fold fits the scaler and the
/// model on the other users only; folds run in user-id order.
pub fn loocv(
    dataset: &[UserSeries],
    trainer: &dyn FoldTrainer,
    t: WindowLength,
) -> Result<LoocvResult, EvalError> {
    if dataset.len() < 2 {
        return Err(EvalError::TooFewUsers(dataset.len()));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.sort_by(|a, b| dataset[*a].user_id().cmp(dataset[*b].user_id()));

    let mut folds = Vec::new();
    let mut skipped = Vec::new();
    for &held in &order {
        let user = dataset[held].user_id().to_string();
        let training: Vec<UserSeries> = dataset
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != held)
            .map(|(_, s)| s.clone())
            .collect();
        let scaler = fit_scaler(&training)?;
        let train_samples = window_dataset(&training, &scaler, t)?;
        let test_samples = window_dataset(std::slice::from_ref(&dataset[held]), &scaler, t)?;
        if train_samples.is_empty() || test_samples.is_empty() {
            log::warn!(
                "fold {user}: skipped ({} training and {} evaluation windows)",
                train_samples.len(),
                test_samples.len()
            );
            skipped.push(user);
            continue;
        }
        log::info!(
            "fold {user}: training {} on {} windows",
            trainer.name(),
            train_samples.len()
        );
        let model = trainer.train(&train_samples, &scaler, t)?;
        let per_day = test_samples
            .iter()
            .map(|s| {
                Ok(DayPrediction {
                    date: s.target_date,
                    truth: s.target_sq,
                    prediction: model.predict_sample(s)?,
                })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        folds.push(FoldResult {
            held_out_user: user,
            metrics: pooled(std::slice::from_ref(&per_day))?,
            per_day,
        });
    }
    if folds.is_empty() {
        return Err(EvalError::NoEvaluableFolds);
    }
    let all: Vec<Vec<DayPrediction>> = folds.iter().map(|f| f.per_day.clone()).collect();
    Ok(LoocvResult {
        model: trainer.name().to_string(),
        window_t: t.previous_days(),
        aggregate: pooled(&all)?,
        folds,
        skipped,
    })
}

fn pooled(groups: &[Vec<DayPrediction>]) -> Result<MetricsReport, EvalError> {
    let (truth, pred): (Vec<f64>, Vec<f64>) = groups
        .iter()
        .flatten()
        .map(|d| (d.truth, d.prediction))
        .unzip();
    compute_metrics(&truth, &pred)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub t: usize,
    pub rmse: f64,
    pub mae: f64,
    pub n: usize,
}

/// Cross-validated error for each window length.
pub fn window_sweep(
    dataset: &[UserSeries],
    trainer: &dyn FoldTrainer,
    t_values: &[WindowLength],
) -> Result<Vec<SweepPoint>, EvalError> {
    if t_values.is_empty() {
        return Err(EvalError::Argument("no window lengths to sweep".into()));
    }
    t_values
        .iter()
        .map(|&t| {
            let result = loocv(dataset, trainer, t)?;
            Ok(SweepPoint {
                t: t.previous_days(),
                rmse: result.aggregate.rmse,
                mae: result.aggregate.mae,
                n: result.aggregate.n,
            })
        })
        .collect()
}

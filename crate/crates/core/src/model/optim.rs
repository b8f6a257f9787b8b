use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::params::ParamSet;
use super::{ModelError, ModelRng};

/// Mini-batch Adam settings shared by the recurrent model and the MLP baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Epochs without validation improvement before stopping; `None` trains
    /// for the full epoch budget on every sample.
    pub early_stop_patience: Option<usize>,
    pub validation_fraction: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 16,
            seed: 42,
            early_stop_patience: Some(20),
            validation_fraction: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    /// Warm-start settings for adapting a population model to one user.
    pub fn fine_tune() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(ModelError::Argument(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(ModelError::Argument("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(ModelError::Argument("batch_size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(ModelError::Argument(format!(
                "validation_fraction must be in [0, 1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean squared error (normalized targets) of each epoch's training passes.
    pub loss_history: Vec<f64>,
    /// Mean squared error on the held-back validation split, when used.
    pub validation_history: Vec<f64>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// A model that can be fitted by [`fit`].
pub trait Trainable {
    type Params: ParamSet;
    type Sample;

    fn params(&self) -> &Self::Params;
    fn params_mut(&mut self) -> &mut Self::Params;

    /// Adds the gradient of `½ (prediction − target)²` for one sample in
    /// training mode to `grad` and returns the squared error.
    fn accumulate_gradient(
        &self,
        sample: &Self::Sample,
        rng: &mut ModelRng,
        grad: &mut Self::Params,
    ) -> Result<f64, ModelError>;

    /// Squared error in evaluation mode.
    fn squared_error(&self, sample: &Self::Sample) -> Result<f64, ModelError>;
}

/// Adam moments for one parameter set.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: i32,
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl Adam {
    pub fn new<P: ParamSet>(params: &P, cfg: &TrainConfig) -> Self {
        let zeros: Vec<Vec<f64>> = params.slices().iter().map(|s| vec![0.0; s.len()]).collect();
        Adam {
            m: zeros.clone(),
            v: zeros,
            step: 0,
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
        }
    }

    pub fn update<P: ParamSet>(&mut self, params: &mut P, grad: &P) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for (k, (p, g)) in params
            .slices_mut()
            .into_iter()
            .zip(grad.slices())
            .enumerate()
        {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for j in 0..p.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let m_hat = m[j] / c1;
                let v_hat = v[j] / c2;
                p[j] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
    }
}

/// Mini-batch Adam with optional early stopping on a held-back split.
///
/// Deterministic given `cfg.seed`: one generator drives the split, the
/// per-epoch shuffles and every dropout mask, in that order.
pub fn fit<M: Trainable>(
    model: &mut M,
    samples: &[M::Sample],
    cfg: &TrainConfig,
) -> Result<TrainReport, ModelError> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(ModelError::Argument("no training samples".into()));
    }
    let mut rng = ModelRng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut rng);

    let n_val = match cfg.early_stop_patience {
        Some(_) if samples.len() >= 10 => {
            ((samples.len() as f64) * cfg.validation_fraction).floor() as usize
        }
        _ => 0,
    };
    let (val_idx, train_idx) = order.split_at(n_val);
    let val_idx = val_idx.to_vec();
    let mut train_idx = train_idx.to_vec();

    let mut adam = Adam::new(model.params(), cfg);
    let mut report = TrainReport {
        loss_history: Vec::with_capacity(cfg.epochs),
        validation_history: Vec::new(),
        best_epoch: 0,
        stopped_early: false,
    };
    let mut best: Option<(f64, M::Params)> = None;
    let mut since_best = 0usize;

    for epoch in 1..=cfg.epochs {
        train_idx.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in train_idx.chunks(cfg.batch_size) {
            let mut grad = model.params().zeros_like();
            for &i in batch {
                total += model.accumulate_gradient(&samples[i], &mut rng, &mut grad)?;
            }
            grad.scale(1.0 / batch.len() as f64);
            if !grad.all_finite() {
                return Err(ModelError::Divergence { epoch });
            }
            adam.update(model.params_mut(), &grad);
        }
        let loss = total / train_idx.len() as f64;
        if !loss.is_finite() {
            return Err(ModelError::Divergence { epoch });
        }
        report.loss_history.push(loss);

        if val_idx.is_empty() {
            report.best_epoch = epoch;
            continue;
        }
        let mut val = 0.0;
        for &i in &val_idx {
            val += model.squared_error(&samples[i])?;
        }
        let val = val / val_idx.len() as f64;
        if !val.is_finite() {
            return Err(ModelError::Divergence { epoch });
        }
        report.validation_history.push(val);
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            best = Some((val, model.params().clone()));
            report.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.early_stop_patience.is_some_and(|p| since_best >= p) {
                report.stopped_early = true;
                break;
            }
        }
    }
    if let Some((_, params)) = best {
        *model.params_mut() = params;
    }
    Ok(report)
}

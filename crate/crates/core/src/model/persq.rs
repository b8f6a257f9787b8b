//! The recurrent sleep-quality regressor: stacked LSTM layers with inverted
//! dropout between them and a dense head on the last hidden state.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::lstm::{LstmLayerParams, LstmStep};
use super::optim::{fit, TrainConfig, TrainReport, Trainable};
use super::params::{DenseLayer, ParamSet};
use super::{ModelError, ModelRng, SqPredictor};
use crate::features::{
    inverse_transform_sq, FeatureVector, Scaler, WindowedSample, FEATURE_WIDTH, MAX_MODEL_WINDOW,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub input_size: usize,
    pub hidden_sizes: Vec<usize>,
    pub dropout_rate: f64,
    pub window_t: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            input_size: FEATURE_WIDTH,
            hidden_sizes: vec![50, 30, 20],
            dropout_rate: 0.2,
            window_t: 3,
            seed: 7,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.input_size == 0 {
            return Err(ModelError::Argument("input size must be positive".into()));
        }
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return Err(ModelError::Argument(format!(
                "layer sizes must be positive, got {:?}",
                self.hidden_sizes
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(ModelError::Argument(format!(
                "dropout rate must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        if self.window_t > MAX_MODEL_WINDOW {
            return Err(ModelError::Argument(format!(
                "window of {} previous days exceeds the supported {MAX_MODEL_WINDOW}",
                self.window_t
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerSqParams {
    pub layers: Vec<LstmLayerParams>,
    pub head: DenseLayer,
}

impl ParamSet for PerSqParams {
    fn slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.layers.iter().flat_map(|l| l.slices()).collect();
        out.extend(self.head.slices());
        out
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = self
            .layers
            .iter_mut()
            .flat_map(|l| l.slices_mut())
            .collect();
        out.extend(self.head.slices_mut());
        out
    }
}

impl PerSqParams {
    pub fn is_consistent(&self) -> bool {
        let chained = self
            .layers
            .windows(2)
            .all(|w| w[0].hidden_size() == w[1].input_size());
        !self.layers.is_empty()
            && chained
            && self.layers.iter().all(LstmLayerParams::is_consistent)
            && self.head.outputs() == 1
            && self.head.bias.len() == 1
            && self.layers.last().map(|l| l.hidden_size()) == Some(self.head.inputs())
    }
}

/// Per layer, per step, per unit dropout multipliers (`0` or `1 / (1 - rate)`).
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMasks(pub Vec<Vec<Vec<f64>>>);

impl DropoutMasks {
    pub fn sample<R: Rng + ?Sized>(
        rng: &mut R,
        rate: f64,
        hidden_sizes: &[usize],
        steps: usize,
    ) -> Self {
        let keep = 1.0 / (1.0 - rate);
        DropoutMasks(
            hidden_sizes
                .iter()
                .map(|&h| {
                    (0..steps)
                        .map(|_| {
                            (0..h)
                                .map(|_| {
                                    if rng.random::<f64>() < rate {
                                        0.0
                                    } else {
                                        keep
                                    }
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        )
    }
}

pub enum Mode<'a> {
    Eval,
    Train(&'a mut ModelRng),
}

/// Activations from one forward pass, required by [`PerSqModel::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    model_version: u64,
    layer_steps: Vec<Vec<LstmStep>>,
    masks: Option<DropoutMasks>,
    head_input: Vec<f64>,
    prediction: f64,
}

impl ForwardCache {
    pub fn masks(&self) -> Option<&DropoutMasks> {
        self.masks.as_ref()
    }

    pub fn prediction(&self) -> f64 {
        self.prediction
    }

    /// Final-step hidden state of the last layer after dropout.
    pub fn head_input(&self) -> &[f64] {
        &self.head_input
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerSqModel {
    params: PerSqParams,
    dropout_rate: f64,
    window_t: usize,
    seed: u64,
    scaler: Option<Scaler>,
    version: u64,
}

impl PerSqModel {
    /// Fresh model with seeded weights and no scaler attached.
    pub fn init(config: &ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ModelRng::seed_from_u64(config.seed);
        let mut layers = Vec::with_capacity(config.hidden_sizes.len());
        let mut input = config.input_size;
        for &hidden in &config.hidden_sizes {
            layers.push(LstmLayerParams::init(input, hidden, &mut rng));
            input = hidden;
        }
        let head = DenseLayer::init(input, 1, &mut rng);
        Ok(PerSqModel {
            params: PerSqParams { layers, head },
            dropout_rate: config.dropout_rate,
            window_t: config.window_t,
            seed: config.seed,
            scaler: None,
            version: 0,
        })
    }

    pub fn from_parts(
        params: PerSqParams,
        dropout_rate: f64,
        window_t: usize,
        seed: u64,
        scaler: Option<Scaler>,
    ) -> Result<Self, ModelError> {
        if !params.is_consistent() {
            return Err(ModelError::Shape("inconsistent layer dimensions".into()));
        }
        if !params.all_finite() {
            return Err(ModelError::Argument("non-finite parameter".into()));
        }
        let config = ModelConfig {
            input_size: params.layers[0].input_size(),
            hidden_sizes: params.layers.iter().map(|l| l.hidden_size()).collect(),
            dropout_rate,
            window_t,
            seed,
        };
        config.validate()?;
        Ok(PerSqModel {
            params,
            dropout_rate,
            window_t,
            seed,
            scaler,
            version: 0,
        })
    }

    pub fn with_scaler(mut self, scaler: Scaler) -> Self {
        self.scaler = Some(scaler);
        self
    }

    pub fn config(&self) -> ModelConfig {
        ModelConfig {
            input_size: self.params.layers[0].input_size(),
            hidden_sizes: self.hidden_sizes(),
            dropout_rate: self.dropout_rate,
            window_t: self.window_t,
            seed: self.seed,
        }
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.params.layers.iter().map(|l| l.hidden_size()).collect()
    }

    pub fn params(&self) -> &PerSqParams {
        &self.params
    }

    /// Mutable parameter access; invalidates outstanding forward caches.
    pub fn params_mut(&mut self) -> &mut PerSqParams {
        self.version += 1;
        &mut self.params
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn set_dropout_rate(&mut self, rate: f64) -> Result<(), ModelError> {
        if !(0.0..1.0).contains(&rate) {
            return Err(ModelError::Argument(format!(
                "dropout rate must be in [0, 1), got {rate}"
            )));
        }
        self.dropout_rate = rate;
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scaler_ref(&self) -> Option<&Scaler> {
        self.scaler.as_ref()
    }

    fn check_shape(&self, sequence: &[Vec<f64>]) -> Result<(), ModelError> {
        if sequence.len() != self.window_t + 1 {
            return Err(ModelError::Shape(format!(
                "window holds {} days, model expects {}",
                sequence.len(),
                self.window_t + 1
            )));
        }
        let width = self.params.layers[0].input_size();
        if let Some(bad) = sequence.iter().find(|x| x.len() != width) {
            return Err(ModelError::Shape(format!(
                "feature width {} does not match layer input {width}",
                bad.len()
            )));
        }
        Ok(())
    }

    pub fn forward(
        &self,
        window: &[FeatureVector],
        mode: Mode<'_>,
    ) -> Result<(f64, ForwardCache), ModelError> {
        let sequence: Vec<Vec<f64>> = window.iter().map(|f| f.values().to_vec()).collect();
        self.forward_sequence(&sequence, mode)
    }

    /// Forward pass over raw input vectors. Training mode draws fresh dropout
    /// masks from `rng`; evaluation mode is deterministic.
    pub fn forward_sequence(
        &self,
        sequence: &[Vec<f64>],
        mode: Mode<'_>,
    ) -> Result<(f64, ForwardCache), ModelError> {
        let masks = match mode {
            Mode::Train(rng) if self.dropout_rate > 0.0 => Some(DropoutMasks::sample(
                rng,
                self.dropout_rate,
                &self.hidden_sizes(),
                sequence.len(),
            )),
            _ => None,
        };
        self.forward_with_masks(sequence, masks)
    }

    /// Forward pass with explicit dropout masks (`None` means no dropout).
    pub fn forward_with_masks(
        &self,
        sequence: &[Vec<f64>],
        masks: Option<DropoutMasks>,
    ) -> Result<(f64, ForwardCache), ModelError> {
        self.check_shape(sequence)?;
        if let Some(DropoutMasks(m)) = &masks {
            let ok = m.len() == self.params.layers.len()
                && m.iter().zip(&self.params.layers).all(|(steps, layer)| {
                    steps.len() == sequence.len()
                        && steps.iter().all(|s| s.len() == layer.hidden_size())
                });
            if !ok {
                return Err(ModelError::Shape(
                    "dropout masks do not match the model".into(),
                ));
            }
        }
        let mut inputs = sequence.to_vec();
        let mut layer_steps = Vec::with_capacity(self.params.layers.len());
        for (l, layer) in self.params.layers.iter().enumerate() {
            let steps = layer.forward_sequence(&inputs);
            inputs = steps
                .iter()
                .enumerate()
                .map(|(t, s)| match &masks {
                    Some(DropoutMasks(m)) => s.h.iter().zip(&m[l][t]).map(|(h, k)| h * k).collect(),
                    None => s.h.clone(),
                })
                .collect();
            layer_steps.push(steps);
        }
        let head_input = inputs.pop().expect("non-empty sequence");
        let prediction = self.params.head.forward(&head_input)[0];
        Ok((
            prediction,
            ForwardCache {
                model_version: self.version,
                layer_steps,
                masks,
                head_input,
                prediction,
            },
        ))
    }

    pub fn backward(
        &self,
        window: &[FeatureVector],
        target_normalized: f64,
        cache: &ForwardCache,
    ) -> Result<PerSqParams, ModelError> {
        let sequence: Vec<Vec<f64>> = window.iter().map(|f| f.values().to_vec()).collect();
        self.backward_sequence(&sequence, target_normalized, cache)
    }

    /// Exact gradient of `½ (prediction − target)²` by backpropagation
    /// through time. Fails if `cache` came from other parameters or inputs.
    pub fn backward_sequence(
        &self,
        sequence: &[Vec<f64>],
        target_normalized: f64,
        cache: &ForwardCache,
    ) -> Result<PerSqParams, ModelError> {
        let mut grad = self.params.zeros_like();
        self.accumulate_backward(sequence, target_normalized, cache, &mut grad)?;
        Ok(grad)
    }

    fn accumulate_backward(
        &self,
        sequence: &[Vec<f64>],
        target: f64,
        cache: &ForwardCache,
        grad: &mut PerSqParams,
    ) -> Result<(), ModelError> {
        let same_inputs = cache.layer_steps.first().is_some_and(|steps| {
            steps.len() == sequence.len() && steps.iter().zip(sequence).all(|(s, x)| &s.x == x)
        });
        if cache.model_version != self.version
            || cache.layer_steps.len() != self.params.layers.len()
            || !same_inputs
        {
            return Err(ModelError::StaleCache);
        }
        let steps = sequence.len();
        let residual = cache.prediction - target;
        let dv = self
            .params
            .head
            .backward(&cache.head_input, &[residual], &mut grad.head);

        let mask = |l: usize, t: usize, j: usize| match &cache.masks {
            Some(DropoutMasks(m)) => m[l][t][j],
            None => 1.0,
        };
        let last = self.params.layers.len() - 1;
        let mut dh_out: Vec<Vec<f64>> = (0..steps)
            .map(|_| vec![0.0; self.params.layers[last].hidden_size()])
            .collect();
        for (j, d) in dv.iter().enumerate() {
            dh_out[steps - 1][j] = d * mask(last, steps - 1, j);
        }
        for l in (0..=last).rev() {
            let dx = self.params.layers[l].backward_sequence(
                &cache.layer_steps[l],
                &dh_out,
                &mut grad.layers[l],
            );
            if l > 0 {
                dh_out = dx
                    .into_iter()
                    .enumerate()
                    .map(|(t, d)| {
                        d.iter()
                            .enumerate()
                            .map(|(j, v)| v * mask(l - 1, t, j))
                            .collect()
                    })
                    .collect();
            }
        }
        Ok(())
    }

    fn scaler_or_err(&self) -> Result<&Scaler, ModelError> {
        self.scaler
            .as_ref()
            .ok_or_else(|| ModelError::State("model has no fitted scaler attached".into()))
    }

    /// Trains in place with mini-batch Adam on normalized targets.
    pub fn train(
        &mut self,
        samples: &[WindowedSample],
        cfg: &TrainConfig,
    ) -> Result<TrainReport, ModelError> {
        let scaler = self.scaler_or_err()?;
        let prepared = samples
            .iter()
            .map(|s| {
                let steps: Vec<Vec<f64>> = s.window.iter().map(|f| f.values().to_vec()).collect();
                self.check_shape(&steps)?;
                Ok(SequenceSample {
                    steps,
                    target: scaler.forward_scale_sq(s.target_sq)?,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        fit(self, &prepared, cfg)
    }

    /// Warm-start adaptation of a trained model to new (personal) samples.
    pub fn fine_tune(
        &mut self,
        samples: &[WindowedSample],
        cfg: &TrainConfig,
    ) -> Result<TrainReport, ModelError> {
        self.train(samples, cfg)
    }

    pub fn predict_normalized(&self, window: &[FeatureVector]) -> Result<f64, ModelError> {
        let (y, _) = self.forward(window, Mode::Eval)?;
        Ok(y)
    }

    /// Sleep quality in percent, always within `[0, 100]`.
    pub fn predict(&self, sample: &WindowedSample) -> Result<f64, ModelError> {
        self.predict_percent(&sample.window)
    }

    pub fn predict_percent(&self, window: &[FeatureVector]) -> Result<f64, ModelError> {
        let scaler = self.scaler_or_err()?;
        let y = self.predict_normalized(window)?;
        if !y.is_finite() {
            return Err(ModelError::State("non-finite prediction".into()));
        }
        Ok(inverse_transform_sq(y, scaler)?)
    }
}

/// A window as raw input vectors with a normalized target.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSample {
    pub steps: Vec<Vec<f64>>,
    pub target: f64,
}

impl Trainable for PerSqModel {
    type Params = PerSqParams;
    type Sample = SequenceSample;

    fn params(&self) -> &PerSqParams {
        &self.params
    }

    fn params_mut(&mut self) -> &mut PerSqParams {
        PerSqModel::params_mut(self)
    }

    fn accumulate_gradient(
        &self,
        sample: &SequenceSample,
        rng: &mut ModelRng,
        grad: &mut PerSqParams,
    ) -> Result<f64, ModelError> {
        let (y, cache) = self.forward_sequence(&sample.steps, Mode::Train(rng))?;
        self.accumulate_backward(&sample.steps, sample.target, &cache, grad)?;
        Ok((y - sample.target).powi(2))
    }

    fn squared_error(&self, sample: &SequenceSample) -> Result<f64, ModelError> {
        let (y, _) = self.forward_sequence(&sample.steps, Mode::Eval)?;
        Ok((y - sample.target).powi(2))
    }
}

impl SqPredictor for PerSqModel {
    fn name(&self) -> &str {
        "persq"
    }

    fn window_t(&self) -> usize {
        self.window_t
    }

    fn scaler(&self) -> Option<&Scaler> {
        self.scaler.as_ref()
    }

    fn predict_window(
        &self,
        window: &[FeatureVector],
        _prev_sq: Option<f64>,
    ) -> Result<f64, ModelError> {
        self.predict_percent(window)
    }
}

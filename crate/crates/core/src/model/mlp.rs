use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::flat::{flatten, flatten_samples, last_day, prev_sq_fill, FlatSample, FLAT_WIDTH};
use super::optim::{fit, TrainConfig, TrainReport, Trainable};
use super::params::{DenseLayer, ParamSet};
use super::{ModelError, ModelRng, SqPredictor};
use crate::features::{inverse_transform_sq, FeatureVector, Scaler, WindowedSample};

/// Fully connected ReLU layers followed by a linear output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<DenseLayer>,
}

impl ParamSet for MlpParams {
    fn slices(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| l.slices()).collect()
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.slices_mut())
            .collect()
    }
}

impl MlpParams {
    /// `hidden` lists the ReLU layer widths; a single output unit follows.
    pub fn init(input_size: usize, hidden: &[usize], seed: u64) -> Result<Self, ModelError> {
        if input_size == 0 || hidden.contains(&0) {
            return Err(ModelError::Argument(format!(
                "layer sizes must be positive, got {input_size} -> {hidden:?}"
            )));
        }
        let mut rng = ModelRng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut inputs = input_size;
        for &h in hidden.iter().chain(std::iter::once(&1)) {
            layers.push(DenseLayer::init(inputs, h, &mut rng));
            inputs = h;
        }
        Ok(MlpParams { layers })
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn is_consistent(&self) -> bool {
        !self.layers.is_empty()
            && self
                .layers
                .windows(2)
                .all(|w| w[0].outputs() == w[1].inputs())
            && self.layers.iter().all(|l| l.bias.len() == l.outputs())
            && self.layers.last().map(DenseLayer::outputs) == Some(1)
    }

    /// Returns the output and every layer's input (post-activation).
    pub fn forward(&self, x: &[f64]) -> Result<(f64, Vec<Vec<f64>>), ModelError> {
        if x.len() != self.input_size() {
            return Err(ModelError::Shape(format!(
                "expected {} inputs, got {}",
                self.input_size(),
                x.len()
            )));
        }
        let mut activations = Vec::with_capacity(self.layers.len());
        let mut a = x.to_vec();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = layer.forward(&a);
            if k < last {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            activations.push(std::mem::replace(&mut a, z));
        }
        Ok((a[0], activations))
    }

    /// Adds the gradient of `½ (y − target)²` to `grad`; returns the squared error.
    pub fn accumulate_gradient(
        &self,
        x: &[f64],
        target: f64,
        grad: &mut MlpParams,
    ) -> Result<f64, ModelError> {
        let (y, activations) = self.forward(x)?;
        let mut dy = vec![y - target];
        for k in (0..self.layers.len()).rev() {
            let dx = self.layers[k].backward(&activations[k], &dy, &mut grad.layers[k]);
            if k > 0 {
                dy = dx
                    .into_iter()
                    .zip(&activations[k])
                    .map(|(d, a)| if *a > 0.0 { d } else { 0.0 })
                    .collect();
            }
        }
        Ok((y - target).powi(2))
    }

    pub fn gradient(&self, x: &[f64], target: f64) -> Result<MlpParams, ModelError> {
        let mut grad = self.zeros_like();
        self.accumulate_gradient(x, target, &mut grad)?;
        Ok(grad)
    }
}

/// MLP baseline over the same flat input as [`super::LinearBaseline`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpBaseline {
    pub params: MlpParams,
    pub prev_sq_fill: f64,
    pub scaler: Option<Scaler>,
}

struct FlatTrainer<'a>(&'a mut MlpParams);

impl Trainable for FlatTrainer<'_> {
    type Params = MlpParams;
    type Sample = FlatSample;

    fn params(&self) -> &MlpParams {
        self.0
    }

    fn params_mut(&mut self) -> &mut MlpParams {
        self.0
    }

    fn accumulate_gradient(
        &self,
        sample: &FlatSample,
        _rng: &mut ModelRng,
        grad: &mut MlpParams,
    ) -> Result<f64, ModelError> {
        self.0.accumulate_gradient(&sample.x, sample.target, grad)
    }

    fn squared_error(&self, sample: &FlatSample) -> Result<f64, ModelError> {
        let (y, _) = self.0.forward(&sample.x)?;
        Ok((y - sample.target).powi(2))
    }
}

impl MlpBaseline {
    pub const DEFAULT_HIDDEN: [usize; 2] = [8, 8];

    pub fn new(params: MlpParams) -> Self {
        MlpBaseline {
            params,
            prev_sq_fill: 0.0,
            scaler: None,
        }
    }

    /// Trains on already flattened samples.
    pub fn train_flat(
        &mut self,
        samples: &[FlatSample],
        cfg: &TrainConfig,
    ) -> Result<TrainReport, ModelError> {
        fit(&mut FlatTrainer(&mut self.params), samples, cfg)
    }

    pub fn fit(
        samples: &[WindowedSample],
        scaler: &Scaler,
        hidden: &[usize],
        cfg: &TrainConfig,
    ) -> Result<(Self, TrainReport), ModelError> {
        let fill = prev_sq_fill(samples)?;
        let flat = flatten_samples(samples, fill, scaler)?;
        let mut model = MlpBaseline {
            params: MlpParams::init(FLAT_WIDTH, hidden, cfg.seed)?,
            prev_sq_fill: fill,
            scaler: Some(scaler.clone()),
        };
        let report = model.train_flat(&flat, cfg)?;
        Ok((model, report))
    }

    pub fn predict(&self, sample: &WindowedSample) -> Result<f64, ModelError> {
        self.predict_window(&sample.window, sample.prev_sq)
    }
}

impl SqPredictor for MlpBaseline {
    fn name(&self) -> &str {
        "mlp"
    }

    fn window_t(&self) -> usize {
        0
    }

    fn scaler(&self) -> Option<&Scaler> {
        self.scaler.as_ref()
    }

    fn predict_window(
        &self,
        window: &[FeatureVector],
        prev_sq: Option<f64>,
    ) -> Result<f64, ModelError> {
        let scaler = self
            .scaler
            .as_ref()
            .ok_or_else(|| ModelError::State("model has no fitted scaler attached".into()))?;
        let x = flatten(last_day(window)?, prev_sq, self.prev_sq_fill, scaler)?;
        let (y, _) = self.params.forward(&x)?;
        if !y.is_finite() {
            return Err(ModelError::State("non-finite prediction".into()));
        }
        Ok(inverse_transform_sq(y, scaler)?)
    }
}

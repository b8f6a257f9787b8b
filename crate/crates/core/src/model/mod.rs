//! Sleep-quality regressors: the stacked-LSTM model, the linear and MLP
//! baselines, and the optimizer they share.

mod checkpoint;
mod flat;
pub mod linalg;
mod linear;
mod lstm;
mod mlp;
mod optim;
mod params;
mod persq;

use thiserror::Error;

use crate::features::{FeatureError, FeatureVector, Scaler, WindowedSample};

pub use checkpoint::{
    load_checkpoint, save_checkpoint, Checkpoint, ModelKind, PerSqState, CHECKPOINT_VERSION,
};
pub use flat::{flatten, prev_sq_fill, FlatSample, FLAT_WIDTH};
pub use linear::{LinearBaseline, LinearRegression};
pub use lstm::{Gate, LstmLayerParams, LstmStep};
pub use mlp::{MlpBaseline, MlpParams};
pub use optim::{fit, Adam, TrainConfig, TrainReport, Trainable};
pub use params::{DenseLayer, ParamSet};
pub use persq::{
    DropoutMasks, ForwardCache, Mode, ModelConfig, PerSqModel, PerSqParams, SequenceSample,
};

/// Generator behind weight init, shuffling and dropout masks.
pub type ModelRng = rand_chacha::ChaCha8Rng;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("forward cache does not match the current parameters or inputs")]
    StaleCache,
    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Divergence { epoch: usize },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}

/// Anything that maps a feature window to a sleep-quality percentage.
pub trait SqPredictor: Send + Sync {
    fn name(&self) -> &str;

    /// Previous days the model expects before the target day.
    fn window_t(&self) -> usize;

    fn scaler(&self) -> Option<&Scaler>;

    /// Prediction in percent for a window of `window_t() + 1` days.
    fn predict_window(
        &self,
        window: &[FeatureVector],
        prev_sq: Option<f64>,
    ) -> Result<f64, ModelError>;

    fn predict_sample(&self, sample: &WindowedSample) -> Result<f64, ModelError> {
        self.predict_window(&sample.window, sample.prev_sq)
    }
}

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::linear::LinearBaseline;
use super::mlp::MlpBaseline;
use super::persq::{PerSqModel, PerSqParams};
use super::{ModelError, SqPredictor};
use crate::features::Scaler;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerSqState {
    pub input_size: usize,
    pub hidden_sizes: Vec<usize>,
    pub dropout_rate: f64,
    pub window_t: usize,
    pub seed: u64,
    pub params: PerSqParams,
    pub scaler: Scaler,
}

/// The model payload, tagged by family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Persq(PerSqState),
    Linear(LinearBaseline),
    Mlp(MlpBaseline),
}

/// Self-describing model file: format version, architecture, row-major
/// weights with declared dimensions, scaler snapshot, window and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub model: ModelKind,
}

impl Checkpoint {
    pub fn from_persq(model: &PerSqModel) -> Result<Self, ModelError> {
        let scaler = model.scaler_ref().cloned().ok_or_else(|| {
            ModelError::State("cannot checkpoint a model without a scaler".into())
        })?;
        let config = model.config();
        Ok(Checkpoint {
            format_version: CHECKPOINT_VERSION,
            model: ModelKind::Persq(PerSqState {
                input_size: config.input_size,
                hidden_sizes: config.hidden_sizes,
                dropout_rate: config.dropout_rate,
                window_t: config.window_t,
                seed: config.seed,
                params: model.params().clone(),
                scaler,
            }),
        })
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        serde_json::to_string_pretty(self).map_err(|e| ModelError::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let checkpoint: Checkpoint =
            serde_json::from_str(text).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        checkpoint.validate()?;
        Ok(checkpoint)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.format_version != CHECKPOINT_VERSION {
            return Err(ModelError::Checkpoint(format!(
                "unsupported format version {} (expected {CHECKPOINT_VERSION})",
                self.format_version
            )));
        }
        match &self.model {
            ModelKind::Persq(state) => {
                let declared = state.params.layers.first().map(|l| l.input_size())
                    == Some(state.input_size)
                    && state
                        .params
                        .layers
                        .iter()
                        .map(|l| l.hidden_size())
                        .eq(state.hidden_sizes.iter().copied());
                if !declared || !state.params.is_consistent() {
                    return Err(ModelError::Checkpoint(
                        "layer dimensions are inconsistent with the declared architecture".into(),
                    ));
                }
                state.scaler.validate()?;
            }
            ModelKind::Linear(m) => {
                if m.regression.coefficients.len() != super::flat::FLAT_WIDTH {
                    return Err(ModelError::Checkpoint(
                        "linear coefficient count does not match input".into(),
                    ));
                }
                m.scaler.validate()?;
            }
            ModelKind::Mlp(m) => {
                if !m.params.is_consistent() || m.params.input_size() != super::flat::FLAT_WIDTH {
                    return Err(ModelError::Checkpoint(
                        "MLP layer dimensions are inconsistent".into(),
                    ));
                }
                if let Some(s) = &m.scaler {
                    s.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn into_predictor(self) -> Result<Box<dyn SqPredictor>, ModelError> {
        self.validate()?;
        Ok(match self.model {
            ModelKind::Persq(state) => Box::new(state.into_model()?),
            ModelKind::Linear(m) => Box::new(m),
            ModelKind::Mlp(m) => Box::new(m),
        })
    }

    pub fn into_persq(self) -> Result<PerSqModel, ModelError> {
        self.validate()?;
        match self.model {
            ModelKind::Persq(state) => state.into_model(),
            _ => Err(ModelError::Checkpoint(
                "checkpoint does not hold the recurrent model".into(),
            )),
        }
    }
}

impl PerSqState {
    pub fn into_model(self) -> Result<PerSqModel, ModelError> {
        PerSqModel::from_parts(
            self.params,
            self.dropout_rate,
            self.window_t,
            self.seed,
            Some(self.scaler),
        )
    }
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<(), ModelError> {
    fs::write(path, checkpoint.to_json()?)
        .map_err(|e| ModelError::Io(path.display().to_string(), e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, ModelError> {
    let text =
        fs::read_to_string(path).map_err(|e| ModelError::Io(path.display().to_string(), e))?;
    Checkpoint::from_json(&text)
}

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::flat::{flatten, flatten_samples, last_day, prev_sq_fill};
use super::{ModelError, SqPredictor};
use crate::features::{inverse_transform_sq, FeatureVector, Scaler, WindowedSample};

/// Smallest admissible ratio of the extreme Gram eigenvalues.
const RANK_TOLERANCE: f64 = 1e-10;

/// Ordinary least squares with an intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRegression {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Set when the exact solve was not usable and a small ridge penalty
    /// was added.
    pub ridge_used: bool,
}

impl LinearRegression {
    /// Solves the normal equations `XᵀX β = Xᵀy` by Cholesky. Falls back to
    /// ridge regularization when there are fewer rows than unknowns or the
    /// Gram matrix is singular or numerically rank deficient.
    pub fn fit(x: &[Vec<f64>], y: &[f64]) -> Result<Self, ModelError> {
        if x.is_empty() {
            return Err(ModelError::Argument("no training samples".into()));
        }
        if x.len() != y.len() {
            return Err(ModelError::Shape(format!(
                "{} rows but {} targets",
                x.len(),
                y.len()
            )));
        }
        let p = x[0].len();
        if x.iter().any(|r| r.len() != p) {
            return Err(ModelError::Shape("rows differ in width".into()));
        }
        if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
            return Err(ModelError::Argument("non-finite training value".into()));
        }
        let n = x.len();
        let design = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] });
        let target = DVector::from_column_slice(y);
        let gram = design.transpose() * &design;
        let rhs = design.transpose() * target;

        let eigenvalues = gram.clone().symmetric_eigenvalues();
        let largest = eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let smallest = eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(*v));
        let well_conditioned = smallest > RANK_TOLERANCE * largest;
        let exact = if n > p && well_conditioned {
            gram.clone().cholesky().map(|c| c.solve(&rhs))
        } else {
            None
        };
        let (beta, ridge_used) = match exact {
            Some(beta) if beta.iter().all(|v| v.is_finite()) => (beta, false),
            _ => {
                let scale = (gram.trace() / (p + 1) as f64).max(1.0);
                let lambda = 1e-6 * scale;
                log::warn!(
                    "linear baseline: Gram matrix singular ({n} samples, {} unknowns); using ridge penalty {lambda:e}",
                    p + 1
                );
                let regularized = gram + DMatrix::identity(p + 1, p + 1) * lambda;
                let beta = regularized
                    .cholesky()
                    .map(|c| c.solve(&rhs))
                    .ok_or_else(|| {
                        ModelError::State("ridge system is not positive definite".into())
                    })?;
                (beta, true)
            }
        };
        Ok(LinearRegression {
            intercept: beta[0],
            coefficients: beta.iter().skip(1).copied().collect(),
            ridge_used,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != self.coefficients.len() {
            return Err(ModelError::Shape(format!(
                "expected {} inputs, got {}",
                self.coefficients.len(),
                x.len()
            )));
        }
        Ok(self.intercept
            + x.iter()
                .zip(&self.coefficients)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }
}

/// Linear baseline over the target day's features and the previous night's SQ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearBaseline {
    pub regression: LinearRegression,
    pub prev_sq_fill: f64,
    pub scaler: Scaler,
}

impl LinearBaseline {
    pub fn fit(samples: &[WindowedSample], scaler: &Scaler) -> Result<Self, ModelError> {
        let fill = prev_sq_fill(samples)?;
        let flat = flatten_samples(samples, fill, scaler)?;
        let x: Vec<Vec<f64>> = flat.iter().map(|s| s.x.clone()).collect();
        let y: Vec<f64> = flat.iter().map(|s| s.target).collect();
        Ok(LinearBaseline {
            regression: LinearRegression::fit(&x, &y)?,
            prev_sq_fill: fill,
            scaler: scaler.clone(),
        })
    }

    pub fn predict(&self, sample: &WindowedSample) -> Result<f64, ModelError> {
        self.predict_window(&sample.window, sample.prev_sq)
    }
}

impl SqPredictor for LinearBaseline {
    fn name(&self) -> &str {
        "linear"
    }

    fn window_t(&self) -> usize {
        0
    }

    fn scaler(&self) -> Option<&Scaler> {
        Some(&self.scaler)
    }

    fn predict_window(
        &self,
        window: &[FeatureVector],
        prev_sq: Option<f64>,
    ) -> Result<f64, ModelError> {
        let x = flatten(last_day(window)?, prev_sq, self.prev_sq_fill, &self.scaler)?;
        let y = self.regression.predict(&x)?;
        if !y.is_finite() {
            return Err(ModelError::State("non-finite prediction".into()));
        }
        Ok(inverse_transform_sq(y, &self.scaler)?)
    }
}

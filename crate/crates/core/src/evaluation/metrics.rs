use serde::{Deserialize, Serialize};

use super::EvalError;

/// Regression quality in percent units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    /// `None` when the truth is constant and R² is undefined.
    pub r2: Option<f64>,
    pub n: usize,
}

pub fn compute_metrics(truth: &[f64], pred: &[f64]) -> Result<MetricsReport, EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::Argument(format!(
            "{} truth values but {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    if truth.is_empty() {
        return Err(EvalError::Argument("no values to score".into()));
    }
    if truth.iter().chain(pred).any(|v| !v.is_finite()) {
        return Err(EvalError::Argument("non-finite value".into()));
    }
    let n = truth.len() as f64;
    let mut abs = 0.0;
    let mut ss_res = 0.0;
    for (t, p) in truth.iter().zip(pred) {
        abs += (p - t).abs();
        ss_res += (p - t).powi(2);
    }
    let mean = truth.iter().sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    let mse = ss_res / n;
    Ok(MetricsReport {
        mae: abs / n,
        mse,
        rmse: mse.sqrt(),
        r2: (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot),
        n: truth.len(),
    })
}

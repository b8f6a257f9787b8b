use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EvalError;

pub const DEFAULT_BIN_WIDTH: f64 = 0.5;

/// Half-open bin `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Counts errors (`prediction − truth`) into bins aligned on multiples of
/// `bin_width`. Only non-empty bins are returned, in ascending order.
pub fn error_histogram(errors: &[f64], bin_width: f64) -> Result<Vec<HistogramBin>, EvalError> {
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(EvalError::Argument(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for e in errors {
        if !e.is_finite() {
            return Err(EvalError::Argument("non-finite error value".into()));
        }
        *counts.entry((e / bin_width).floor() as i64).or_insert(0) += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(k, count)| HistogramBin {
            lo: k as f64 * bin_width,
            hi: (k + 1) as f64 * bin_width,
            count,
        })
        .collect())
}

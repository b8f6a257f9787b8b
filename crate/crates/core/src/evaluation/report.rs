use std::io::Write;

use super::cv::{LoocvResult, SweepPoint};
use super::histogram::HistogramBin;
use super::EvalError;

fn r2_field(r2: Option<f64>) -> String {
    r2.map_or_else(|| "NaN".to_string(), |v| v.to_string())
}

/// `model,fold,mae,mse,rmse,r2` with one row per fold and an `all` row per
/// model holding the pooled metrics.
pub fn write_fold_metrics<W: Write>(out: W, results: &[LoocvResult]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "fold", "mae", "mse", "rmse", "r2"])?;
    for result in results {
        let rows = result
            .folds
            .iter()
            .map(|f| (f.held_out_user.as_str(), &f.metrics))
            .chain(std::iter::once(("all", &result.aggregate)));
        for (fold, m) in rows {
            w.write_record([
                result.model.clone(),
                fold.to_string(),
                m.mae.to_string(),
                m.mse.to_string(),
                m.rmse.to_string(),
                r2_field(m.r2),
            ])?;
        }
    }
    w.flush().map_err(|e| EvalError::Io("metrics".into(), e))
}

/// `model,fold,date,truth,prediction,error`
pub fn write_per_day<W: Write>(out: W, results: &[LoocvResult]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "fold", "date", "truth", "prediction", "error"])?;
    for result in results {
        for fold in &result.folds {
            for d in &fold.per_day {
                w.write_record([
                    result.model.clone(),
                    fold.held_out_user.clone(),
                    d.date.to_string(),
                    d.truth.to_string(),
                    d.prediction.to_string(),
                    d.error().to_string(),
                ])?;
            }
        }
    }
    w.flush()
        .map_err(|e| EvalError::Io("per-day predictions".into(), e))
}

/// `model,t,rmse,mae,n`
pub fn write_sweep<W: Write>(out: W, model: &str, points: &[SweepPoint]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "t", "rmse", "mae", "n"])?;
    for p in points {
        w.write_record([
            model.to_string(),
            p.t.to_string(),
            p.rmse.to_string(),
            p.mae.to_string(),
            p.n.to_string(),
        ])?;
    }
    w.flush().map_err(|e| EvalError::Io("sweep".into(), e))
}

/// `lo,hi,count`
pub fn write_histogram<W: Write>(out: W, bins: &[HistogramBin]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lo", "hi", "count"])?;
    for b in bins {
        w.write_record([b.lo.to_string(), b.hi.to_string(), b.count.to_string()])?;
    }
    w.flush().map_err(|e| EvalError::Io("histogram".into(), e))
}

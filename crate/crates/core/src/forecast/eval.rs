use serde::{Deserialize, Serialize};

use super::NvarModel;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Actuals below this magnitude are excluded from MAPE.
pub const NEAR_ZERO_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mape_percent: f64,
    pub n_scored: usize,
    pub n_skipped_near_zero: usize,
}

pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<EvalReport> {
    mape_with_epsilon(actual, predicted, NEAR_ZERO_EPSILON)
}

/// Mean of `100 |a - p| / |a|` over points with `|a| >= epsilon`; skipped
/// points are counted, never dropped silently.
pub fn mape_with_epsilon(actual: &[f64], predicted: &[f64], epsilon: f64) -> Result<EvalReport> {
    if actual.len() != predicted.len() || actual.is_empty() {
        return Err(Error::Precondition(format!(
            "mape needs equal, non-empty inputs (got {} and {})",
            actual.len(),
            predicted.len()
        )));
    }
    let mut total = 0.0;
    let mut scored = 0usize;
    for (a, p) in actual.iter().zip(predicted) {
        if a.abs() < epsilon {
            continue;
        }
        total += 100.0 * (a - p).abs() / a.abs();
        scored += 1;
    }
    if scored == 0 {
        return Err(Error::UndefinedMetric(
            "every actual value is near zero; MAPE is undefined".into(),
        ));
    }
    Ok(EvalReport {
        mape_percent: total / scored as f64,
        n_scored: scored,
        n_skipped_near_zero: actual.len() - scored,
    })
}

/// Repeats the last full season: step `h` copies `history[len - period + (h-1) % period]`.
pub fn seasonal_naive(history: &TimeSeries, period: usize, horizon: usize) -> Result<Vec<f64>> {
    seasonal_naive_values(&history.dense()?, period, horizon)
}

pub fn seasonal_naive_values(history: &[f64], period: usize, horizon: usize) -> Result<Vec<f64>> {
    if period == 0 {
        return Err(Error::Config("seasonal period must be >= 1".into()));
    }
    if history.len() < period {
        return Err(Error::InsufficientData {
            needed: period,
            available: history.len(),
        });
    }
    let base = history.len() - period;
    Ok((0..horizon).map(|h| history[base + h % period]).collect())
}

/// Something that turns a history into `horizon` predictions.
pub trait Forecaster {
    fn predict(&self, history: &[f64], horizon: usize) -> Result<Vec<f64>>;
}

impl Forecaster for NvarModel {
    fn predict(&self, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
        self.forecast_values(history, horizon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeasonalNaive {
    pub period: usize,
}

impl Forecaster for SeasonalNaive {
    fn predict(&self, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
        seasonal_naive_values(history, self.period, horizon)
    }
}

/// Rolling-origin evaluation over `values[test_start..]`.
///
/// Origins advance by `horizon`; at each origin the forecaster sees every
/// actual value before it. Returns aligned `(actual, predicted)`.
pub fn rolling_predictions<F: Forecaster + ?Sized>(
    f: &F,
    values: &[f64],
    test_start: usize,
    horizon: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be >= 1".into()));
    }
    if test_start == 0 || test_start >= values.len() {
        return Err(Error::Precondition(format!(
            "test split starts at {test_start} but the series has {} samples",
            values.len()
        )));
    }
    let mut actual = Vec::with_capacity(values.len() - test_start);
    let mut predicted = Vec::with_capacity(values.len() - test_start);
    let mut origin = test_start;
    while origin < values.len() {
        let h = horizon.min(values.len() - origin);
        let p = f.predict(&values[..origin], h)?;
        actual.extend_from_slice(&values[origin..origin + h]);
        predicted.extend_from_slice(&p);
        origin += h;
    }
    Ok((actual, predicted))
}

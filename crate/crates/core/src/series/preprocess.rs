use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Sample, TimeSeries};
use crate::error::{Error, Result};
use crate::stats::mean_std;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillMethod {
    Linear,
    HoldLast,
}

/// Replaces every missing sample.
///
/// Leading gaps take the first present value and trailing gaps the last one,
/// for both methods. Interior gaps are interpolated between the nearest
/// present neighbours (`Linear`) or take the previous present value
/// (`HoldLast`).
pub fn fill_gaps(s: &TimeSeries, method: FillMethod) -> Result<TimeSeries> {
    let src = s.samples();
    let present: Vec<(usize, f64)> = src
        .iter()
        .enumerate()
        .filter_map(|(k, v)| v.map(|x| (k, x)))
        .collect();
    let (&(first_k, first_v), &(last_k, last_v)) = match (present.first(), present.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::UnrecoverableData(
                "every sample is missing; nothing to fill from".into(),
            ))
        }
    };

    let mut out: Vec<Sample> = src.to_vec();
    for slot in out.iter_mut().take(first_k) {
        *slot = Some(first_v);
    }
    for slot in out.iter_mut().skip(last_k + 1) {
        *slot = Some(last_v);
    }
    for pair in present.windows(2) {
        let (ka, va) = pair[0];
        let (kb, vb) = pair[1];
        if kb - ka < 2 {
            continue;
        }
        let span = (kb - ka) as f64;
        for (k, slot) in out.iter_mut().enumerate().take(kb).skip(ka + 1) {
            *slot = Some(match method {
                FillMethod::Linear => va + (vb - va) * ((k - ka) as f64 / span),
                FillMethod::HoldLast => va,
            });
        }
    }
    Ok(s.with_values(out))
}

/// Marks as missing every present sample deviating from the trailing mean
/// by more than `k` trailing standard deviations (two-sided).
///
/// Statistics come from the previous `window` accepted samples; until that
/// many have been seen, samples pass unchanged. With a zero trailing std a
/// sample is removed only if it differs from the mean by more than 1e-9.
pub fn remove_outliers(s: &TimeSeries, window: usize, k: f64) -> Result<TimeSeries> {
    if window < 2 {
        return Err(Error::Config(format!(
            "outlier window must be >= 2, got {window}"
        )));
    }
    if !(k > 0.0) {
        return Err(Error::Config(format!("outlier k must be > 0, got {k}")));
    }
    let mut trailing: VecDeque<f64> = VecDeque::with_capacity(window);
    let mut out = Vec::with_capacity(s.len());
    for v in s.samples() {
        let Some(x) = *v else {
            out.push(None);
            continue;
        };
        if trailing.len() == window {
            let (mean, std) = mean_std(trailing.iter().copied());
            let dev = (x - mean).abs();
            let outlier = if std < ZERO_STD {
                dev > ZERO_STD
            } else {
                dev > k * std
            };
            if outlier {
                out.push(None);
                continue;
            }
            trailing.pop_front();
        }
        trailing.push_back(x);
        out.push(Some(x));
    }
    Ok(s.with_values(out))
}

const ZERO_STD: f64 = 1e-9;

/// Sums non-overlapping blocks of `factor` samples; a trailing partial block
/// is dropped.
pub fn aggregate(s: &TimeSeries, factor: usize) -> Result<TimeSeries> {
    if factor == 0 {
        return Err(Error::Config("aggregation factor must be >= 1".into()));
    }
    let dense = s.dense()?;
    let blocks = dense.len() / factor;
    if blocks == 0 {
        return Err(Error::InsufficientData {
            needed: factor,
            available: dense.len(),
        });
    }
    let values = dense
        .chunks_exact(factor)
        .map(|c| Some(c.iter().sum::<f64>()))
        .collect();
    TimeSeries::new(s.start_time(), s.step() * factor as i64, values)
}

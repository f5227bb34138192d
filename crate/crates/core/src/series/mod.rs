//! Time-series data model, synthetic consumption, lossy sampling and
//! preprocessing.

mod csv_io;
mod generate;
mod preprocess;

pub use csv_io::{read_csv, read_csv_path, read_csv_str, write_csv, write_csv_string};
pub use generate::{apply_loss, generate_consumption, GeneratorConfig, Weather};
pub use preprocess::{aggregate, fill_gaps, remove_outliers, FillMethod};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sample; `None` marks a reading lost on the way in.
pub type Sample = Option<f64>;

/// Uniformly sampled consumption values (liters per interval).
///
/// Timestamps are implicit: sample `k` sits at `start_time + k * step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    start_time: i64,
    step: i64,
    values: Vec<Sample>,
}

impl TimeSeries {
    pub fn new(start_time: i64, step: i64, values: Vec<Sample>) -> Result<Self> {
        if step <= 0 {
            return Err(Error::Config(format!("step must be > 0, got {step}")));
        }
        if values.is_empty() {
            return Err(Error::Config("series must hold at least one sample".into()));
        }
        for (k, v) in values.iter().enumerate() {
            if let Some(x) = v {
                if !x.is_finite() || *x < 0.0 {
                    return Err(Error::Config(format!(
                        "sample {k} = {x}: consumption must be finite and >= 0"
                    )));
                }
            }
        }
        Ok(Self {
            start_time,
            step,
            values,
        })
    }

    /// Builds a series with every sample present.
    pub fn from_values(start_time: i64, step: i64, values: &[f64]) -> Result<Self> {
        Self::new(start_time, step, values.iter().copied().map(Some).collect())
    }

    pub fn start_time(&self) -> i64 {
        self.start_time
    }

    pub fn step(&self) -> i64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.values
    }

    pub fn timestamp(&self, k: usize) -> i64 {
        self.start_time + k as i64 * self.step
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(Option::is_none)
    }

    /// Present values as a dense vector; fails if anything is missing.
    pub fn dense(&self) -> Result<Vec<f64>> {
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                v.ok_or_else(|| {
                    Error::Precondition(format!("sample {k} is missing; fill gaps first"))
                })
            })
            .collect()
    }

    /// Contiguous sub-range `[from, to)` with the matching start time.
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        if from >= to || to > self.len() {
            return Err(Error::Precondition(format!(
                "invalid slice {from}..{to} of a series of length {}",
                self.len()
            )));
        }
        Ok(Self {
            start_time: self.timestamp(from),
            step: self.step,
            values: self.values[from..to].to_vec(),
        })
    }

    pub(crate) fn with_values(&self, values: Vec<Sample>) -> Self {
        Self {
            start_time: self.start_time,
            step: self.step,
            values,
        }
    }
}

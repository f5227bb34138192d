//! One-sided mean + k sigma detection over a trailing window, synthetic
//! anomaly injection and detection scoring.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::stats::mean_std;

const ZERO_STD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Normal,
    Anomaly,
    Warmup,
}

/// Streaming upper-tail detector. Values flagged as anomalous never enter
/// the window, so a sustained excess cannot inflate the statistics that are
/// supposed to catch it.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaDetector {
    window: usize,
    k: f64,
    min_samples: usize,
    buf: VecDeque<f64>,
}

impl SigmaDetector {
    pub fn new(window: usize, k: f64, min_samples: usize) -> Result<Self> {
        if window < 2 {
            return Err(Error::Config(format!("detector window must be >= 2, got {window}")));
        }
        if !(k > 0.0) {
            return Err(Error::Config(format!("detector k must be > 0, got {k}")));
        }
        if min_samples < 2 || min_samples > window + 1 {
            return Err(Error::Config(format!(
                "detector min_samples must lie in 2..={}, got {min_samples}",
                window + 1
            )));
        }
        Ok(Self {
            window,
            k,
            min_samples,
            buf: VecDeque::with_capacity(window),
        })
    }

    /// One simulated week of hourly samples, k = 3.
    pub fn weekly_default() -> Self {
        Self::new(168, 3.0, 168).expect("valid defaults")
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Mean and sample standard deviation of the current window.
    pub fn stats(&self) -> (f64, f64) {
        mean_std(self.buf.iter().copied())
    }

    pub fn window_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.buf.iter().copied()
    }

    /// Classifies `value` against the window as it stood before it, then
    /// folds it in unless it was anomalous.
    pub fn update(&mut self, value: f64) -> Verdict {
        let observed = self.buf.len() + 1;
        let verdict = if observed < self.min_samples {
            Verdict::Warmup
        } else {
            let (mean, std) = self.stats();
            let anomalous = if std < ZERO_STD {
                value - mean > ZERO_STD
            } else {
                value > mean + self.k * std
            };
            if anomalous {
                Verdict::Anomaly
            } else {
                Verdict::Normal
            }
        };
        if verdict != Verdict::Anomaly {
            if self.buf.len() == self.window {
                self.buf.pop_front();
            }
            self.buf.push_back(value);
        }
        verdict
    }
}

/// Value-semantic form of [`SigmaDetector::update`].
pub fn update_and_classify(det: &SigmaDetector, value: f64) -> (SigmaDetector, Verdict) {
    let mut next = det.clone();
    let v = next.update(value);
    (next, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    /// Large transient spike, e.g. a pipe break.
    Burst,
    /// Small persistent offset.
    Leak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalySpec {
    pub kind: AnomalyKind,
    pub start_tick: usize,
    pub duration_ticks: usize,
    pub magnitude: f64,
}

impl AnomalySpec {
    pub fn interval(&self) -> std::ops::Range<usize> {
        self.start_tick..self.start_tick + self.duration_ticks
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        if self.duration_ticks == 0 {
            return Err(Error::Config("anomaly duration must be >= 1".into()));
        }
        if !(self.magnitude > 0.0) || !self.magnitude.is_finite() {
            return Err(Error::Config(format!(
                "anomaly magnitude must be > 0, got {}",
                self.magnitude
            )));
        }
        if self.start_tick + self.duration_ticks > len {
            return Err(Error::Config(format!(
                "anomaly interval {}..{} exceeds series length {len}",
                self.start_tick,
                self.start_tick + self.duration_ticks
            )));
        }
        Ok(())
    }
}

/// Adds `magnitude` to every tick of the interval. Returns the modified
/// series and the affected ticks.
pub fn inject(s: &TimeSeries, spec: &AnomalySpec) -> Result<(TimeSeries, Vec<usize>)> {
    spec.validate(s.len())?;
    let mut values = s.samples().to_vec();
    for t in spec.interval() {
        match values[t].as_mut() {
            Some(v) => *v += spec.magnitude,
            None => {
                return Err(Error::Precondition(format!(
                    "sample {t} inside the anomaly interval is missing"
                )))
            }
        }
    }
    Ok((s.with_values(values), spec.interval().collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DetectionReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub misses: usize,
    /// One entry per ground-truth event, `None` for a miss.
    pub latencies: Vec<Option<usize>>,
    pub false_positive_rate: f64,
}

impl DetectionReport {
    pub fn mean_latency(&self) -> Option<f64> {
        let hits: Vec<usize> = self.latencies.iter().flatten().copied().collect();
        (!hits.is_empty()).then(|| hits.iter().sum::<usize>() as f64 / hits.len() as f64)
    }

    /// Pools reports from independent streams.
    pub fn merge(reports: &[DetectionReport], negatives: &[usize]) -> DetectionReport {
        let mut out = DetectionReport::default();
        for r in reports {
            out.true_positives += r.true_positives;
            out.false_positives += r.false_positives;
            out.misses += r.misses;
            out.latencies.extend_from_slice(&r.latencies);
        }
        let denom: usize = negatives.iter().sum();
        out.false_positive_rate = if denom == 0 {
            0.0
        } else {
            out.false_positives as f64 / denom as f64
        };
        out
    }
}

/// Scores a verdict stream against ground-truth intervals.
///
/// An event is a true positive if any tick inside it is flagged; its latency
/// is the first flagged tick minus its start. Every flagged tick outside all
/// intervals is a false positive; the rate divides by the number of
/// non-warm-up ticks outside all intervals.
pub fn evaluate(verdicts: &[Verdict], events: &[std::ops::Range<usize>]) -> DetectionReport {
    let (report, _) = evaluate_with_negatives(verdicts, events);
    report
}

/// [`evaluate`] plus the false-positive denominator, for pooling.
pub fn evaluate_with_negatives(
    verdicts: &[Verdict],
    events: &[std::ops::Range<usize>],
) -> (DetectionReport, usize) {
    let mut report = DetectionReport::default();
    for ev in events {
        let end = ev.end.min(verdicts.len());
        let first = (ev.start.min(end)..end).find(|&t| verdicts[t] == Verdict::Anomaly);
        match first {
            Some(t) => {
                report.true_positives += 1;
                report.latencies.push(Some(t - ev.start));
            }
            None => {
                report.misses += 1;
                report.latencies.push(None);
            }
        }
    }
    let mut negatives = 0usize;
    for (t, v) in verdicts.iter().enumerate() {
        if events.iter().any(|ev| ev.contains(&t)) || *v == Verdict::Warmup {
            continue;
        }
        negatives += 1;
        if *v == Verdict::Anomaly {
            report.false_positives += 1;
        }
    }
    report.false_positive_rate = if negatives == 0 {
        0.0
    } else {
        report.false_positives as f64 / negatives as f64
    };
    (report, negatives)
}

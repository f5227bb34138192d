use serde::{Deserialize, Serialize};

use super::ChannelModel;
use crate::anomaly::SigmaDetector;
use crate::error::{Error, Result};
use crate::forecast::{Forecaster, NvarModel, NvarSpec, SeasonalNaive};
use crate::inference::InferenceParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    EventDriven,
    Periodic,
}

/// Forecaster a parent uses for each child's daily-average series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForecasterConfig {
    Nvar {
        delays: usize,
        degree: u8,
        ridge_lambda: f64,
        include_bias: bool,
    },
    SeasonalNaive {
        period: usize,
    },
}

impl Default for ForecasterConfig {
    fn default() -> Self {
        // One week of daily lags.
        ForecasterConfig::Nvar {
            delays: 7,
            degree: 1,
            ridge_lambda: 1e-3,
            include_bias: true,
        }
    }
}

impl ForecasterConfig {
    pub fn min_history(&self) -> usize {
        match self {
            ForecasterConfig::Nvar { delays, .. } => delays + 1,
            ForecasterConfig::SeasonalNaive { period } => *period,
        }
    }

    pub fn train(&self, history: &[f64]) -> Result<DailyModel> {
        match self {
            ForecasterConfig::Nvar {
                delays,
                degree,
                ridge_lambda,
                include_bias,
            } => {
                let spec = NvarSpec {
                    delays: *delays,
                    degree: *degree,
                    ridge_lambda: *ridge_lambda,
                    include_bias: *include_bias,
                };
                Ok(DailyModel::Nvar(NvarModel::train_values(history, &spec)?))
            }
            ForecasterConfig::SeasonalNaive { period } => {
                if *period == 0 {
                    return Err(Error::Config("seasonal period must be >= 1".into()));
                }
                if history.len() < *period {
                    return Err(Error::InsufficientData {
                        needed: *period,
                        available: history.len(),
                    });
                }
                Ok(DailyModel::Seasonal(SeasonalNaive { period: *period }))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DailyModel {
    Nvar(NvarModel),
    Seasonal(SeasonalNaive),
}

impl Forecaster for DailyModel {
    fn predict(&self, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
        match self {
            DailyModel::Nvar(m) => m.predict(history, horizon),
            DailyModel::Seasonal(m) => m.predict(history, horizon),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub window: usize,
    pub k: f64,
    pub min_samples: usize,
}

impl DetectorConfig {
    pub fn build(&self) -> Result<SigmaDetector> {
        SigmaDetector::new(self.window, self.k, self.min_samples)
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window: 168,
            k: 3.0,
            min_samples: 168,
        }
    }
}

/// Byte sizes charged per message kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MessageSizes {
    pub prediction_down: u64,
    pub error_up: u64,
    pub reading_up: u64,
    pub alarm: u64,
}

impl Default for MessageSizes {
    fn default() -> Self {
        Self {
            prediction_down: 12,
            error_up: 8,
            reading_up: 8,
            alarm: 4,
        }
    }
}

/// `energy = e_tx * messages_sent + e_cpu * node_updates`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyModel {
    pub e_tx: f64,
    pub e_cpu: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            e_tx: 50.0,
            e_cpu: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub mode: Mode,
    /// Ticks between raw readings in periodic mode.
    pub reporting_interval: u64,
    pub ticks_per_day: u64,
    pub fog_prediction_interval: u64,
    pub cloud_prediction_interval: u64,
    /// Step size applied to received weighted errors when a parent updates
    /// its belief about a child.
    pub belief_gain: f64,
    pub channel: ChannelModel,
    pub inference: InferenceParams,
    pub fog_forecaster: ForecasterConfig,
    pub cloud_forecaster: ForecasterConfig,
    pub edge_detector: DetectorConfig,
    pub fog_detector: DetectorConfig,
    pub message_sizes: MessageSizes,
    pub energy: EnergyModel,
    pub record_events: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            mode: Mode::EventDriven,
            reporting_interval: 24,
            ticks_per_day: 24,
            fog_prediction_interval: 24,
            cloud_prediction_interval: 720,
            belief_gain: 0.1,
            channel: ChannelModel::default(),
            inference: InferenceParams::default(),
            fog_forecaster: ForecasterConfig::default(),
            cloud_forecaster: ForecasterConfig::default(),
            edge_detector: DetectorConfig::default(),
            fog_detector: DetectorConfig {
                window: 14,
                k: 3.0,
                min_samples: 14,
            },
            message_sizes: MessageSizes::default(),
            energy: EnergyModel::default(),
            record_events: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.inference.validate()?;
        self.channel.validate()?;
        self.edge_detector.build()?;
        self.fog_detector.build()?;
        for (name, v) in [
            ("reporting_interval", self.reporting_interval),
            ("ticks_per_day", self.ticks_per_day),
            ("fog_prediction_interval", self.fog_prediction_interval),
            ("cloud_prediction_interval", self.cloud_prediction_interval),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        if !(self.belief_gain >= 0.0) || !self.belief_gain.is_finite() {
            return Err(Error::Config("belief_gain must be finite and >= 0".into()));
        }
        if !(self.energy.e_tx >= 0.0 && self.energy.e_cpu >= 0.0) {
            return Err(Error::Config("energy coefficients must be >= 0".into()));
        }
        Ok(())
    }
}

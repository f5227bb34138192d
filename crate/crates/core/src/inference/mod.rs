//! Active-inference arithmetic for one hierarchy level: prediction errors,
//! precision, precision-weighted errors, EWMA thresholds, cross-layer
//! threshold blending and free energy.

mod free_energy;

pub use free_energy::{
    discrete_free_energy, gaussian_entropy, layer_free_energy, DiscreteBelief,
    DiscreteGenerativeModel, FreeEnergy, FreeEnergyForm,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Signed error `input - prediction`.
pub fn prediction_error(input: f64, prediction: f64) -> Result<f64> {
    if !input.is_finite() {
        return Err(Error::NonFinite(input));
    }
    if !prediction.is_finite() {
        return Err(Error::NonFinite(prediction));
    }
    Ok(input - prediction)
}

/// Running error statistics and the precision derived from them.
///
/// `precision == 1 / (error_var + beta)` holds after every update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionState {
    error_mean: f64,
    error_var: f64,
    beta: f64,
    precision: f64,
    alpha_var: f64,
}

impl PrecisionState {
    pub fn new(beta: f64, alpha_var: f64) -> Result<Self> {
        Self::with_variance(0.0, beta, alpha_var)
    }

    pub fn with_variance(error_var: f64, beta: f64, alpha_var: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Config(format!("beta must be > 0, got {beta}")));
        }
        if !(alpha_var > 0.0 && alpha_var < 1.0) {
            return Err(Error::Config(format!(
                "alpha_var must lie in (0, 1), got {alpha_var}"
            )));
        }
        if !(error_var >= 0.0) {
            return Err(Error::Config(format!(
                "error variance must be >= 0, got {error_var}"
            )));
        }
        Ok(Self {
            error_mean: 0.0,
            error_var,
            beta,
            precision: 1.0 / (error_var + beta),
            alpha_var,
        })
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn error_mean(&self) -> f64 {
        self.error_mean
    }

    pub fn error_var(&self) -> f64 {
        self.error_var
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha_var(&self) -> f64 {
        self.alpha_var
    }

    /// EWMA mean and variance of the error stream, then `1 / (var + beta)`.
    #[must_use]
    pub fn update(&self, eps: f64) -> Self {
        let a = self.alpha_var;
        let diff = eps - self.error_mean;
        let error_mean = self.error_mean + (1.0 - a) * diff;
        let error_var = a * (self.error_var + (1.0 - a) * diff * diff);
        Self {
            error_mean,
            error_var,
            precision: 1.0 / (error_var + self.beta),
            ..*self
        }
    }

    pub fn weighted_error(&self, eps: f64) -> f64 {
        self.precision * eps
    }
}

pub fn update_precision(state: &PrecisionState, eps: f64) -> PrecisionState {
    state.update(eps)
}

/// `precision * eps`.
pub fn weighted_error(state: &PrecisionState, eps: f64) -> f64 {
    state.weighted_error(eps)
}

/// EWMA threshold on |weighted error|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdState {
    tau: f64,
    alpha: f64,
    warmup_remaining: u32,
}

impl ThresholdState {
    pub fn new(tau: f64, alpha: f64, warmup: u32) -> Result<Self> {
        if !(tau >= 0.0) {
            return Err(Error::Config(format!("tau must be >= 0, got {tau}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self {
            tau,
            alpha,
            warmup_remaining: warmup,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn warmup_remaining(&self) -> u32 {
        self.warmup_remaining
    }

    /// Gating is suppressed until warm-up has elapsed.
    pub fn gating_enabled(&self) -> bool {
        self.warmup_remaining == 0
    }

    /// `tau' = alpha * tau + (1 - alpha) * |weighted_eps|`.
    #[must_use]
    pub fn update(&self, weighted_eps: f64) -> Self {
        let tau = if self.tau.is_infinite() {
            self.tau
        } else {
            self.alpha * self.tau + (1.0 - self.alpha) * weighted_eps.abs()
        };
        Self {
            tau,
            warmup_remaining: self.warmup_remaining.saturating_sub(1),
            ..*self
        }
    }

    /// Counts down warm-up without moving tau.
    #[must_use]
    pub fn tick_frozen(&self) -> Self {
        Self {
            warmup_remaining: self.warmup_remaining.saturating_sub(1),
            ..*self
        }
    }
}

pub fn update_threshold(state: &ThresholdState, weighted_eps: f64) -> ThresholdState {
    state.update(weighted_eps)
}

/// Blends a layer's own threshold with the error magnitudes of its
/// neighbours: `(1 - gamma) tau + gamma (below + above) / 2`.
pub fn propagate_threshold(
    tau_own: f64,
    ewma_abs_err_below: f64,
    ewma_abs_err_above: f64,
    gamma: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Config(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    for v in [tau_own, ewma_abs_err_below, ewma_abs_err_above] {
        if !(v >= 0.0) {
            return Err(Error::Config(format!(
                "threshold inputs must be >= 0, got {v}"
            )));
        }
    }
    // Avoid 0 * inf when one side is switched off entirely.
    if gamma == 0.0 {
        return Ok(tau_own);
    }
    let neighbours = (ewma_abs_err_below + ewma_abs_err_above) / 2.0;
    if gamma == 1.0 {
        return Ok(neighbours);
    }
    Ok((1.0 - gamma) * tau_own + gamma * neighbours)
}

/// Tunables shared by every node's inference state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alpha_var: f64,
    pub warmup: u32,
    pub initial_tau: f64,
    pub free_energy_form: FreeEnergyForm,
    /// Report only when `|weighted error| > gate_margin * tau`.
    pub gate_margin: f64,
    /// Keep every tau at `initial_tau`.
    pub freeze_thresholds: bool,
}

impl Default for InferenceParams {
    fn default() -> Self {
        Self {
            alpha: 0.9,
            beta: 1e-3,
            gamma: 0.25,
            alpha_var: 0.95,
            warmup: 50,
            initial_tau: 0.0,
            free_energy_form: FreeEnergyForm::Literal,
            gate_margin: DEFAULT_GATE_MARGIN,
            freeze_thresholds: false,
        }
    }
}

/// Fixed after pilot runs on the default 30-edge scenario.
pub const DEFAULT_GATE_MARGIN: f64 = 3.0;

impl InferenceParams {
    pub fn validate(&self) -> Result<()> {
        ThresholdState::new(self.initial_tau, self.alpha, self.warmup)?;
        PrecisionState::new(self.beta, self.alpha_var)?;
        propagate_threshold(0.0, 0.0, 0.0, self.gamma)?;
        if !(self.gate_margin > 0.0) || !self.gate_margin.is_finite() {
            return Err(Error::Config(format!(
                "gate_margin must be finite and > 0, got {}",
                self.gate_margin
            )));
        }
        Ok(())
    }

    pub fn threshold_state(&self) -> Result<ThresholdState> {
        ThresholdState::new(self.initial_tau, self.alpha, self.warmup)
    }

    pub fn precision_state(&self) -> Result<PrecisionState> {
        PrecisionState::new(self.beta, self.alpha_var)
    }
}

//! Nonlinear vector autoregression: time-delay embedding, optional
//! quadratic monomials, and a ridge-trained linear readout.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::linalg::{dot, lstsq_qr, Matrix};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NvarSpec {
    /// Number of lagged inputs `k`.
    pub delays: usize,
    /// Polynomial order of the feature vector, 1 or 2.
    pub degree: u8,
    pub ridge_lambda: f64,
    pub include_bias: bool,
}

impl Default for NvarSpec {
    fn default() -> Self {
        Self {
            delays: 24,
            degree: 1,
            ridge_lambda: 1e-6,
            include_bias: true,
        }
    }
}

impl NvarSpec {
    pub fn validate(&self) -> Result<()> {
        if self.delays == 0 {
            return Err(Error::Config("nvar.delays must be >= 1".into()));
        }
        if !matches!(self.degree, 1 | 2) {
            return Err(Error::Config(format!(
                "nvar.degree must be 1 or 2, got {}",
                self.degree
            )));
        }
        if !(self.ridge_lambda >= 0.0) || !self.ridge_lambda.is_finite() {
            return Err(Error::Config(format!(
                "nvar.ridge_lambda must be finite and >= 0, got {}",
                self.ridge_lambda
            )));
        }
        Ok(())
    }

    /// `bias + k + (degree 2: k(k+1)/2)`.
    pub fn feature_dim(&self) -> usize {
        let k = self.delays;
        let quad = if self.degree == 2 { k * (k + 1) / 2 } else { 0 };
        usize::from(self.include_bias) + k + quad
    }

    /// Feature row from lags ordered most recent first.
    fn features_into(&self, lags: &[f64], out: &mut Vec<f64>) {
        out.clear();
        if self.include_bias {
            out.push(1.0);
        }
        out.extend_from_slice(lags);
        if self.degree == 2 {
            for i in 0..lags.len() {
                for j in i..lags.len() {
                    out.push(lags[i] * lags[j]);
                }
            }
        }
    }
}

/// Builds the design matrix and targets from a dense series.
///
/// Row `t` (for `t = k .. len-1`) holds `[1?] ++ [x_{t-1} .. x_{t-k}]` and,
/// for degree 2, the upper-triangular pairwise products of those lags.
pub fn embed_values(values: &[f64], spec: &NvarSpec) -> Result<(Matrix, Vec<f64>)> {
    spec.validate()?;
    let k = spec.delays;
    if values.len() <= k {
        return Err(Error::InsufficientData {
            needed: k + 1,
            available: values.len(),
        });
    }
    let mut x = Matrix::zeros(0, spec.feature_dim());
    let mut y = Vec::with_capacity(values.len() - k);
    let mut lags = vec![0.0; k];
    let mut row = Vec::with_capacity(spec.feature_dim());
    for t in k..values.len() {
        for (i, lag) in lags.iter_mut().enumerate() {
            *lag = values[t - 1 - i];
        }
        spec.features_into(&lags, &mut row);
        x.push_row(&row);
        y.push(values[t]);
    }
    Ok((x, y))
}

pub fn embed(s: &TimeSeries, spec: &NvarSpec) -> Result<(Matrix, Vec<f64>)> {
    embed_values(&s.dense()?, spec)
}

/// Ridge regression `argmin ||Xw - y||^2 + lambda ||w_pen||^2`.
///
/// `unpenalized` names a column (the bias) left out of the penalty. Solved
/// as least squares on `[X; sqrt(lambda) D]` by QR, which has the same
/// minimiser as the regularised normal equations.
pub fn fit_ridge(
    features: &Matrix,
    targets: &[f64],
    lambda: f64,
    unpenalized: Option<usize>,
) -> Result<Vec<f64>> {
    if features.rows() != targets.len() || targets.is_empty() {
        return Err(Error::Precondition(format!(
            "feature rows ({}) must equal target count ({}) and be >= 1",
            features.rows(),
            targets.len()
        )));
    }
    if !(lambda >= 0.0) {
        return Err(Error::Config(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    let n = features.rows();
    let d = features.cols();
    let penalized: Vec<usize> = (0..d).filter(|j| Some(*j) != unpenalized).collect();
    let extra = if lambda > 0.0 { penalized.len() } else { 0 };
    let sq = lambda.sqrt();

    let mut cols = vec![vec![0.0; n + extra]; d];
    for i in 0..n {
        for (j, v) in features.row(i).iter().enumerate() {
            cols[j][i] = *v;
        }
    }
    if extra > 0 {
        for (r, &j) in penalized.iter().enumerate() {
            cols[j][n + r] = sq;
        }
    }
    let mut b = targets.to_vec();
    b.resize(n + extra, 0.0);
    lstsq_qr(cols, b)
}

/// A trained forecaster: the spec plus its readout weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NvarModel {
    pub spec: NvarSpec,
    pub weights: Vec<f64>,
    pub train_residual_std: f64,
}

impl NvarModel {
    pub fn new(spec: NvarSpec, weights: Vec<f64>, train_residual_std: f64) -> Result<Self> {
        spec.validate()?;
        if weights.len() != spec.feature_dim() {
            return Err(Error::Config(format!(
                "weight count {} does not match feature dimension {}",
                weights.len(),
                spec.feature_dim()
            )));
        }
        Ok(Self {
            spec,
            weights,
            train_residual_std,
        })
    }

    pub fn train(s: &TimeSeries, spec: &NvarSpec) -> Result<Self> {
        Self::train_values(&s.dense()?, spec)
    }

    pub fn train_values(values: &[f64], spec: &NvarSpec) -> Result<Self> {
        let (x, y) = embed_values(values, spec)?;
        let bias = spec.include_bias.then_some(0);
        let weights = fit_ridge(&x, &y, spec.ridge_lambda, bias)?;
        let fitted = x.mul_vec(&weights);
        let sse: f64 = fitted.iter().zip(&y).map(|(f, t)| (f - t) * (f - t)).sum();
        let train_residual_std = (sse / y.len() as f64).sqrt();
        Self::new(spec.clone(), weights, train_residual_std)
    }

    /// Iterated one-step forecast; each prediction feeds the next lag window.
    /// Predictions are clamped at zero.
    pub fn forecast(&self, history: &TimeSeries, horizon: usize) -> Result<Vec<f64>> {
        self.forecast_values(&history.dense()?, horizon)
    }

    pub fn forecast_values(&self, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
        if horizon == 0 {
            return Err(Error::Precondition("forecast horizon must be >= 1".into()));
        }
        let k = self.spec.delays;
        if history.len() < k {
            return Err(Error::InsufficientData {
                needed: k,
                available: history.len(),
            });
        }
        // Lags, most recent first.
        let mut lags: Vec<f64> = history.iter().rev().take(k).copied().collect();
        let mut row = Vec::with_capacity(self.weights.len());
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            self.spec.features_into(&lags, &mut row);
            let p = dot(&row, &self.weights).max(0.0);
            out.push(p);
            lags.rotate_right(1);
            lags[0] = p;
        }
        Ok(out)
    }

    /// Linear lag coefficients, skipping the bias.
    pub fn linear_weights(&self) -> &[f64] {
        let off = usize::from(self.spec.include_bias);
        &self.weights[off..off + self.spec.delays]
    }

    /// Flat text form: `key: value` lines, then one weight per line with
    /// 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "delays: {}", self.spec.delays);
        let _ = writeln!(s, "degree: {}", self.spec.degree);
        let _ = writeln!(s, "ridge_lambda: {:.16e}", self.spec.ridge_lambda);
        let _ = writeln!(s, "include_bias: {}", self.spec.include_bias);
        let _ = writeln!(s, "train_residual_std: {:.16e}", self.train_residual_std);
        let _ = writeln!(s, "weights: {}", self.weights.len());
        for w in &self.weights {
            let _ = writeln!(s, "{w:.16e}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut field = |key: &str| -> Result<String> {
            let (n, line) = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing `{key}` line")))?;
            let (k, v) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `{key}: value`", n + 1)))?;
            if k.trim() != key {
                return Err(Error::Parse(format!(
                    "line {}: expected `{key}`, found `{}`",
                    n + 1,
                    k.trim()
                )));
            }
            Ok(v.trim().to_string())
        };
        let parse_err = |key: &str, v: &str| Error::Parse(format!("bad {key} `{v}`"));
        let delays = field("delays")?;
        let delays = delays.parse().map_err(|_| parse_err("delays", &delays))?;
        let degree = field("degree")?;
        let degree = degree.parse().map_err(|_| parse_err("degree", &degree))?;
        let lambda = field("ridge_lambda")?;
        let ridge_lambda = lambda.parse().map_err(|_| parse_err("ridge_lambda", &lambda))?;
        let bias = field("include_bias")?;
        let include_bias = bias.parse().map_err(|_| parse_err("include_bias", &bias))?;
        let rstd = field("train_residual_std")?;
        let train_residual_std = rstd
            .parse()
            .map_err(|_| parse_err("train_residual_std", &rstd))?;
        let count = field("weights")?;
        let count: usize = count.parse().map_err(|_| parse_err("weights", &count))?;

        let weights = lines
            .map(|(n, l)| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad weight `{}`", n + 1, l.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        if weights.len() != count {
            return Err(Error::Parse(format!(
                "header announces {count} weights, found {}",
                weights.len()
            )));
        }
        let spec = NvarSpec {
            delays,
            degree,
            ridge_lambda,
            include_bias,
        };
        Self::new(spec, weights, train_residual_std)
    }
}

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use super::PrecisionState;
use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeEnergyForm {
    /// `0.5 * (precision * eps)^2 + H`
    #[default]
    Literal,
    /// `0.5 * precision * eps^2 + H`
    Standard,
}

/// Differential entropy of a Gaussian whose variance is `1 / precision`.
pub fn gaussian_entropy(precision: f64) -> f64 {
    0.5 * (2.0 * PI * E / precision).ln()
}

pub fn layer_free_energy(state: &PrecisionState, eps: f64, form: FreeEnergyForm) -> f64 {
    let p = state.precision();
    let accuracy = match form {
        FreeEnergyForm::Literal => {
            let w = p * eps;
            0.5 * w * w
        }
        FreeEnergyForm::Standard => 0.5 * p * eps * eps,
    };
    accuracy + gaussian_entropy(p)
}

/// Recognition density q(s) over a finite state set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBelief {
    probs: Vec<f64>,
}

impl DiscreteBelief {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_distribution(&probs, "belief")?;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Joint p(s, o), rows indexed by hidden state, columns by observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGenerativeModel {
    joint: Vec<Vec<f64>>,
    n_obs: usize,
}

impl DiscreteGenerativeModel {
    pub fn new(joint: Vec<Vec<f64>>) -> Result<Self> {
        let n_obs = joint.first().map_or(0, Vec::len);
        if joint.is_empty() || n_obs == 0 || joint.iter().any(|r| r.len() != n_obs) {
            return Err(Error::Config(
                "joint table must be a non-empty rectangular states x observations matrix".into(),
            ));
        }
        let flat: Vec<f64> = joint.iter().flatten().copied().collect();
        check_distribution(&flat, "joint")?;
        Ok(Self { joint, n_obs })
    }

    pub fn n_states(&self) -> usize {
        self.joint.len()
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    /// p(o) = sum over states of p(s, o).
    pub fn evidence(&self, obs: usize) -> Result<f64> {
        if obs >= self.n_obs {
            return Err(Error::Config(format!(
                "observation index {obs} out of range (model has {})",
                self.n_obs
            )));
        }
        Ok(self.joint.iter().map(|row| row[obs]).sum())
    }

    /// p(s | o).
    pub fn posterior(&self, obs: usize) -> Result<Vec<f64>> {
        let evidence = self.evidence(obs)?;
        if evidence <= 0.0 {
            return Err(Error::ImpossibleObservation(obs));
        }
        Ok(self.joint.iter().map(|row| row[obs] / evidence).collect())
    }
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Config(format!("{what} must be non-empty")));
    }
    if let Some(v) = p.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::Config(format!("{what} has invalid entry {v}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Config(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergy {
    pub free_energy: f64,
    pub kl: f64,
    pub surprise: f64,
}

/// `F = KL(q || p(s|o)) - ln p(o)`, with `0 ln 0 = 0`.
pub fn discrete_free_energy(
    q: &DiscreteBelief,
    model: &DiscreteGenerativeModel,
    obs: usize,
) -> Result<FreeEnergy> {
    if q.probs.len() != model.n_states() {
        return Err(Error::Config(format!(
            "belief has {} states, model has {}",
            q.probs.len(),
            model.n_states()
        )));
    }
    let evidence = model.evidence(obs)?;
    if evidence <= 0.0 {
        return Err(Error::ImpossibleObservation(obs));
    }
    let surprise = -evidence.ln();
    let mut kl = 0.0;
    for (i, (&qi, row)) in q.probs.iter().zip(&model.joint).enumerate() {
        if qi == 0.0 {
            continue;
        }
        let post = row[obs] / evidence;
        if post <= 0.0 {
            return Err(Error::DivergenceUndefined(i));
        }
        kl += qi * (qi / post).ln();
    }
    // Rounding can leave a tiny negative sum when q equals the posterior.
    let kl = kl.max(0.0);
    Ok(FreeEnergy {
        free_energy: kl + surprise,
        kl,
        surprise,
    })
}

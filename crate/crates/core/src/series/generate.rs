use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};
use crate::seed;

const DAY: i64 = 86_400;
const WEEK: i64 = 7 * DAY;

/// Shape of a synthetic household demand curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub days: u32,
    /// Sample spacing in seconds; must divide one day.
    pub step: i64,
    pub base_level: f64,
    pub daily_amplitude: f64,
    pub weekly_amplitude: f64,
    /// Liters per interval per degree above the reference temperature.
    pub weather_coupling: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            days: 60,
            step: 3600,
            base_level: 20.0,
            daily_amplitude: 8.0,
            weekly_amplitude: 3.0,
            weather_coupling: 0.5,
            noise_std: 2.0,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn horizon(&self) -> usize {
        (i64::from(self.days) * DAY / self.step) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.days == 0 {
            return Err(Error::Config("generator.days must be >= 1".into()));
        }
        if self.step <= 0 || DAY % self.step != 0 {
            return Err(Error::Config(format!(
                "generator.step must be a positive divisor of 86400, got {}",
                self.step
            )));
        }
        if !(self.base_level >= 0.0) {
            return Err(Error::Config("generator.base_level must be >= 0".into()));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::Config("generator.noise_std must be >= 0".into()));
        }
        if self.daily_amplitude.abs() + self.weekly_amplitude.abs() > self.base_level {
            return Err(Error::Config(
                "generator amplitudes exceed base_level; noiseless demand would go negative"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Temperature covariate (degrees Celsius) aligned with a demand series.
///
/// Kept apart from [`TimeSeries`] because temperatures may be negative and
/// are never missing.
#[derive(Debug, Clone, PartialEq)]
pub struct Weather {
    pub start_time: i64,
    pub step: i64,
    pub temperature: Vec<f64>,
    pub reference_temp: f64,
}

impl Weather {
    /// Flat temperature equal to the reference: no weather effect.
    pub fn neutral(start_time: i64, step: i64, len: usize, reference_temp: f64) -> Self {
        Self {
            start_time,
            step,
            temperature: vec![reference_temp; len],
            reference_temp,
        }
    }

    /// Deterministic diurnal temperature cycle peaking mid-afternoon.
    pub fn diurnal(
        start_time: i64,
        step: i64,
        len: usize,
        mean: f64,
        amplitude: f64,
        reference_temp: f64,
    ) -> Self {
        let temperature = (0..len)
            .map(|k| {
                let t = start_time + k as i64 * step;
                let tod = t.rem_euclid(DAY) as f64 / DAY as f64;
                mean + amplitude * (2.0 * PI * (tod - 0.375)).sin()
            })
            .collect();
        Self {
            start_time,
            step,
            temperature,
            reference_temp,
        }
    }

    pub fn len(&self) -> usize {
        self.temperature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temperature.is_empty()
    }
}

/// Synthetic per-interval consumption for one meter.
///
/// `value_k = max(0, base + daily + weekly + coupling * (temp_k - ref) + noise)`
pub fn generate_consumption(cfg: &GeneratorConfig, weather: &Weather) -> Result<TimeSeries> {
    cfg.validate()?;
    let n = cfg.horizon();
    if weather.len() != n {
        return Err(Error::Config(format!(
            "weather has {} samples but the generator horizon is {n}",
            weather.len()
        )));
    }
    if weather.step != cfg.step {
        return Err(Error::Config(format!(
            "weather step {} differs from generator step {}",
            weather.step, cfg.step
        )));
    }
    if weather.temperature.iter().any(|t| !t.is_finite()) {
        return Err(Error::Config("weather temperatures must be finite".into()));
    }
    let start = weather.start_time;
    let mut rng = seed::rng(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_std)
        .map_err(|e| Error::Config(format!("noise_std: {e}")))?;

    let values = (0..n)
        .map(|k| {
            let t = start + k as i64 * cfg.step;
            let day_phase = t.rem_euclid(DAY) as f64 / DAY as f64;
            let week_phase = t.rem_euclid(WEEK) as f64 / WEEK as f64;
            let mut v = cfg.base_level
                + cfg.daily_amplitude * (2.0 * PI * day_phase).sin()
                + cfg.weekly_amplitude * (2.0 * PI * week_phase).sin()
                + cfg.weather_coupling * (weather.temperature[k] - weather.reference_temp);
            if cfg.noise_std > 0.0 {
                v += noise.sample(&mut rng);
            }
            Some(v.max(0.0))
        })
        .collect();
    TimeSeries::new(start, cfg.step, values)
}

/// Drops each sample independently with probability `loss_prob`.
pub fn apply_loss(s: &TimeSeries, loss_prob: f64, seed: u64) -> Result<TimeSeries> {
    if !(0.0..=1.0).contains(&loss_prob) {
        return Err(Error::Config(format!(
            "loss_prob must lie in [0, 1], got {loss_prob}"
        )));
    }
    if s.has_missing() {
        return Err(Error::Precondition(
            "apply_loss expects a series without missing samples".into(),
        ));
    }
    let mut rng = seed::rng(seed);
    let values = s
        .samples()
        .iter()
        .map(|v| if rng.gen::<f64>() < loss_prob { None } else { *v })
        .collect();
    Ok(s.with_values(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_cfg() -> GeneratorConfig {
        GeneratorConfig {
            days: 2,
            step: 3600,
            base_level: 100.0,
            daily_amplitude: 0.0,
            weekly_amplitude: 0.0,
            weather_coupling: 0.0,
            noise_std: 0.0,
            seed: 42,
        }
    }

    #[test]
    fn constant_when_variation_disabled() {
        let cfg = flat_cfg();
        let w = Weather::neutral(0, 3600, cfg.horizon(), 15.0);
        let s = generate_consumption(&cfg, &w).unwrap();
        assert!(s.dense().unwrap().iter().all(|&v| v == 100.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = GeneratorConfig {
            noise_std: 5.0,
            daily_amplitude: 10.0,
            ..flat_cfg()
        };
        let w = Weather::diurnal(0, 3600, cfg.horizon(), 12.0, 6.0, 15.0);
        let a = generate_consumption(&cfg, &w).unwrap();
        let b = generate_consumption(&cfg, &w).unwrap();
        assert_eq!(a, b);
        let c = generate_consumption(&GeneratorConfig { seed: 43, ..cfg }, &w).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn daily_sinusoid_extrema() {
        let cfg = GeneratorConfig {
            daily_amplitude: 10.0,
            days: 1,
            ..flat_cfg()
        };
        let w = Weather::neutral(0, 3600, cfg.horizon(), 15.0);
        let v = generate_consumption(&cfg, &w).unwrap().dense().unwrap();
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((min - 90.0).abs() < 1e-9, "{min}");
        assert!((max - 110.0).abs() < 1e-9, "{max}");
    }

    #[test]
    fn weather_coupling_adds_linear_term() {
        let cfg = GeneratorConfig {
            weather_coupling: 2.0,
            days: 1,
            ..flat_cfg()
        };
        let w = Weather {
            start_time: 0,
            step: 3600,
            temperature: vec![20.0; 24],
            reference_temp: 15.0,
        };
        let v = generate_consumption(&cfg, &w).unwrap().dense().unwrap();
        for x in v {
            assert!((x - 110.0).abs() < 1e-9);
        }
    }

    #[test]
    fn weather_length_mismatch_is_config_error() {
        let cfg = flat_cfg();
        let w = Weather::neutral(0, 3600, 5, 15.0);
        assert!(matches!(
            generate_consumption(&cfg, &w),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn loss_extremes() {
        let s = TimeSeries::from_values(0, 60, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(apply_loss(&s, 0.0, 7).unwrap(), s);
        assert_eq!(apply_loss(&s, 1.0, 7).unwrap().missing_count(), 4);
        assert!(apply_loss(&s, 1.5, 7).is_err());
        assert!(apply_loss(&s, -0.1, 7).is_err());
    }

    #[test]
    fn loss_count_concentrates() {
        let s = TimeSeries::from_values(0, 60, &vec![1.0; 10_000]).unwrap();
        let lost = apply_loss(&s, 0.1, 99).unwrap().missing_count() as f64;
        let bound = 3.0 * (10_000.0f64 * 0.1 * 0.9).sqrt();
        assert!((lost - 1000.0).abs() <= bound, "lost {lost}");
    }
}

//! Reproducible experiments: scenario files, series generation, runs and
//! reports.
//!
//! Every random stream is seeded with `master ^ fnv1a64(path)`; paths are
//! `edge/{i}/generator`, `edge/{i}/loss` and `channel`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::anomaly::{evaluate_with_negatives, AnomalyKind, AnomalySpec, DetectionReport, Verdict};
use crate::error::{Error, Result};
use crate::forecast::{mape, rolling_predictions, EvalReport, NvarModel, NvarSpec, SeasonalNaive};
use crate::netsim::{detection_latency, Event, Layer, Mode, Network, SimConfig, SimMetrics, Topology};
use crate::seed::{derive_seed, path_hash};
use crate::series::{
    apply_loss, fill_gaps, generate_consumption, read_csv_path, FillMethod, GeneratorConfig,
    TimeSeries, Weather,
};

const DAY: i64 = 86_400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub edges: usize,
    pub fogs: usize,
}

/// Synthetic demand shared by every meter; only the seed differs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandConfig {
    pub step: i64,
    pub base_level: f64,
    pub daily_amplitude: f64,
    pub weekly_amplitude: f64,
    pub weather_coupling: f64,
    pub noise_std: f64,
    pub temperature_mean: f64,
    pub temperature_amplitude: f64,
    pub reference_temp: f64,
    /// Probability that a meter reading is missing from the generated CSV.
    pub meter_loss_prob: f64,
}

impl Default for DemandConfig {
    fn default() -> Self {
        let g = GeneratorConfig::default();
        Self {
            step: g.step,
            base_level: g.base_level,
            daily_amplitude: g.daily_amplitude,
            weekly_amplitude: g.weekly_amplitude,
            weather_coupling: g.weather_coupling,
            noise_std: g.noise_std,
            temperature_mean: 15.0,
            temperature_amplitude: 0.0,
            reference_temp: 15.0,
            meter_loss_prob: 0.0,
        }
    }
}

/// An anomaly injected into edge `edge` (0-based), at a simulated tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnomalyConfig {
    pub edge: usize,
    pub kind: AnomalyKind,
    pub start_tick: usize,
    pub duration_ticks: usize,
    pub magnitude: f64,
}

impl AnomalyConfig {
    fn spec(&self, offset: usize) -> AnomalySpec {
        AnomalySpec {
            kind: self.kind,
            start_tick: self.start_tick + offset,
            duration_ticks: self.duration_ticks,
            magnitude: self.magnitude,
        }
    }
}

/// Offline forecaster comparison at hourly and daily resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastEvalConfig {
    pub hourly: NvarSpec,
    pub daily: NvarSpec,
    pub hourly_period: usize,
    pub daily_period: usize,
    pub hourly_horizon: usize,
    pub daily_horizon: usize,
}

impl Default for ForecastEvalConfig {
    fn default() -> Self {
        Self {
            hourly: NvarSpec::default(),
            daily: NvarSpec {
                delays: 7,
                ridge_lambda: 1e-3,
                ..NvarSpec::default()
            },
            hourly_period: 24,
            daily_period: 7,
            hourly_horizon: 24,
            daily_horizon: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    /// Simulated days after the history.
    pub days: u32,
    #[serde(default = "default_history_days")]
    pub history_days: u32,
    pub topology: TopologyConfig,
    #[serde(default)]
    pub demand: DemandConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub forecast: ForecastEvalConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anomalies: Vec<AnomalyConfig>,
    /// Directory of per-meter CSV files, relative to the scenario file.
    /// Series are generated when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
}

fn default_history_days() -> u32 {
    56
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.days == 0 {
            return Err(Error::Config("days must be >= 1".into()));
        }
        self.topology()?;
        self.generator_config(0).validate()?;
        if self.ticks_per_day() as u64 != self.sim.ticks_per_day {
            return Err(Error::Config(format!(
                "sim.ticks_per_day is {} but demand.step gives {} samples per day",
                self.sim.ticks_per_day,
                self.ticks_per_day()
            )));
        }
        self.sim.validate()?;
        if self.sim.channel.seed != 0 {
            return Err(Error::Config(
                "sim.channel.seed is derived from the master seed; remove it".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.demand.meter_loss_prob) {
            return Err(Error::Config("demand.meter_loss_prob must lie in [0, 1]".into()));
        }
        let min_days = self
            .sim
            .fog_forecaster
            .min_history()
            .max(self.sim.cloud_forecaster.min_history())
            .max(self.forecast.daily.delays + 1)
            .max(self.forecast.daily_period);
        if (self.history_days as usize) < min_days {
            return Err(Error::Config(format!(
                "history_days must be >= {min_days} for the configured forecasters"
            )));
        }
        self.forecast.hourly.validate()?;
        self.forecast.daily.validate()?;
        if self.forecast.hourly_horizon == 0 || self.forecast.daily_horizon == 0 {
            return Err(Error::Config("forecast horizons must be >= 1".into()));
        }
        for (i, a) in self.anomalies.iter().enumerate() {
            if a.edge >= self.topology.edges {
                return Err(Error::Config(format!(
                    "anomalies[{i}].edge = {} but there are {} edges",
                    a.edge, self.topology.edges
                )));
            }
            a.spec(0).validate(self.ticks())?;
        }
        Ok(())
    }

    pub fn topology(&self) -> Result<Topology> {
        Topology::balanced(self.topology.edges, self.topology.fogs)
    }

    pub fn ticks_per_day(&self) -> usize {
        if self.demand.step <= 0 {
            return 0;
        }
        (DAY / self.demand.step) as usize
    }

    pub fn history_len(&self) -> usize {
        self.history_days as usize * self.ticks_per_day()
    }

    pub fn ticks(&self) -> usize {
        self.days as usize * self.ticks_per_day()
    }

    pub fn generator_config(&self, edge: usize) -> GeneratorConfig {
        let d = &self.demand;
        GeneratorConfig {
            days: self.history_days + self.days,
            step: d.step,
            base_level: d.base_level,
            daily_amplitude: d.daily_amplitude,
            weekly_amplitude: d.weekly_amplitude,
            weather_coupling: d.weather_coupling,
            noise_std: d.noise_std,
            seed: derive_seed(self.seed, &format!("edge/{edge}/generator")),
        }
    }

    pub fn meter_id(edge: usize) -> String {
        format!("meter-{edge:04}")
    }

    /// Stable identity of everything but the master seed.
    pub fn fingerprint(&self) -> Result<String> {
        let mut s = self.clone();
        s.seed = 0;
        Ok(format!("{:016x}", path_hash(&s.to_toml_string()?)))
    }

    /// Generated meter series, history included, with anomalies injected and
    /// meter-side gaps applied.
    pub fn generate_meters(&self) -> Result<BTreeMap<String, TimeSeries>> {
        let mut out = BTreeMap::new();
        for edge in 0..self.topology.edges {
            let cfg = self.generator_config(edge);
            let d = &self.demand;
            let weather = Weather::diurnal(
                0,
                d.step,
                cfg.horizon(),
                d.temperature_mean,
                d.temperature_amplitude,
                d.reference_temp,
            );
            let mut s = generate_consumption(&cfg, &weather)?;
            for a in self.anomalies.iter().filter(|a| a.edge == edge) {
                s = crate::anomaly::inject(&s, &a.spec(self.history_len()))?.0;
            }
            if d.meter_loss_prob > 0.0 {
                let seed = derive_seed(self.seed, &format!("edge/{edge}/loss"));
                s = apply_loss(&s, d.meter_loss_prob, seed)?;
            }
            out.insert(Self::meter_id(edge), s);
        }
        Ok(out)
    }

    /// Dense per-edge series for simulation: read from `data` if set,
    /// generated otherwise. Gaps are filled linearly.
    pub fn load_series(&self, base_dir: &Path) -> Result<Vec<Vec<f64>>> {
        let meters = match &self.data {
            None => self.generate_meters()?,
            Some(dir) => {
                let dir = base_dir.join(dir);
                let mut meters = BTreeMap::new();
                for edge in 0..self.topology.edges {
                    let id = Self::meter_id(edge);
                    let path = dir.join(format!("{id}.csv"));
                    let mut file = read_csv_path(&path)?;
                    let s = file.remove(&id).ok_or_else(|| {
                        Error::Config(format!("{} has no rows for {id}", path.display()))
                    })?;
                    meters.insert(id, s);
                }
                meters
            }
        };
        let need = self.history_len() + self.ticks();
        let mut out = Vec::with_capacity(meters.len());
        for (id, s) in meters {
            if s.step() != self.demand.step {
                return Err(Error::Config(format!(
                    "{id} has step {} but the scenario expects {}",
                    s.step(),
                    self.demand.step
                )));
            }
            if s.len() < need {
                return Err(Error::InsufficientData {
                    needed: need,
                    available: s.len(),
                });
            }
            let s = if s.has_missing() {
                fill_gaps(&s, FillMethod::Linear)?
            } else {
                s
            };
            let mut v = s.dense()?;
            v.truncate(need);
            out.push(v);
        }
        Ok(out)
    }

    /// Simulation config for one mode, with the channel seed derived.
    pub fn sim_config(&self, mode: Mode) -> SimConfig {
        let mut c = self.sim.clone();
        c.mode = mode;
        c.channel.seed = derive_seed(self.seed, "channel");
        c
    }

    pub fn run_mode(&self, mode: Mode, series: &[Vec<f64>]) -> Result<(SimMetrics, Vec<Event>)> {
        let mut net = Network::build(self.topology()?, self.sim_config(mode))?;
        net.attach(series.to_vec(), self.history_len())?;
        let mut log = Vec::new();
        let metrics = net.run_with(|evs| log.extend_from_slice(evs))?;
        Ok((metrics, log))
    }

    /// Ground-truth onsets as `(edge node id, simulated tick)`.
    pub fn onsets(&self) -> Result<Vec<(u32, u64)>> {
        let edges = self.topology()?.edges();
        Ok(self
            .anomalies
            .iter()
            .map(|a| (edges[a.edge], a.start_tick as u64))
            .collect())
    }

    /// Runs every requested mode plus the offline forecast comparison.
    pub fn execute(&self, modes: &[Mode], base_dir: &Path) -> Result<(RunReport, Vec<(Mode, Vec<Event>)>)> {
        let series = self.load_series(base_dir)?;
        let mut runs = Vec::new();
        let mut logs = Vec::new();
        for &mode in modes {
            let (metrics, log) = self.run_mode(mode, &series)?;
            runs.push(ModeRun { mode, metrics });
            logs.push((mode, log));
        }
        let detection = match runs.first() {
            Some(r) if !self.anomalies.is_empty() => Some(self.detection_summary(&r.metrics)?),
            _ => None,
        };
        let forecast = forecast_table(
            &series,
            self.history_len(),
            self.ticks_per_day(),
            &self.forecast,
        )?;
        let report = RunReport {
            fingerprint: self.fingerprint()?,
            seed: self.seed,
            comparison: Comparison::from_runs(&runs),
            runs,
            forecast,
            detection,
        };
        Ok((report, logs))
    }

    /// Scores edge alarms against the injected anomalies.
    pub fn detection_summary(&self, metrics: &SimMetrics) -> Result<DetectionSummary> {
        let edges = self.topology()?.edges();
        let ticks = self.ticks();
        let mut reports = Vec::new();
        let mut negatives = Vec::new();
        for (i, &id) in edges.iter().enumerate() {
            let mut verdicts = vec![Verdict::Normal; ticks];
            for e in metrics
                .detection_events
                .iter()
                .filter(|e| e.layer == Layer::Edge && e.origin == id)
            {
                verdicts[e.tick as usize] = Verdict::Anomaly;
            }
            let events: Vec<_> = self
                .anomalies
                .iter()
                .filter(|a| a.edge == i)
                .map(|a| a.spec(0).interval())
                .collect();
            let (r, n) = evaluate_with_negatives(&verdicts, &events);
            reports.push(r);
            negatives.push(n);
        }
        let onsets = self.onsets()?;
        Ok(DetectionSummary {
            report: DetectionReport::merge(&reports, &negatives),
            edge_latency: detection_latency(metrics, &onsets, Layer::Edge),
            fog_latency: detection_latency(metrics, &onsets, Layer::Fog),
            cloud_latency: detection_latency(metrics, &onsets, Layer::Cloud),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRun {
    pub mode: Mode,
    pub metrics: SimMetrics,
}

/// Event-driven over periodic. `None` when the periodic count is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub message_ratio: Option<f64>,
    pub byte_ratio: Option<f64>,
    pub energy_ratio: Option<f64>,
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then(|| a / b)
}

impl Comparison {
    /// Message and byte ratios use edge reports after warm-up and edge
    /// report bytes; the energy ratio uses the whole-network proxy.
    pub fn between(event: &SimMetrics, periodic: &SimMetrics) -> Self {
        Self {
            message_ratio: ratio(
                event.messages_up_after_warmup as f64,
                periodic.messages_up_after_warmup as f64,
            ),
            byte_ratio: ratio(event.bytes_up as f64, periodic.bytes_up as f64),
            energy_ratio: ratio(event.energy_proxy, periodic.energy_proxy),
        }
    }

    pub fn from_runs(runs: &[ModeRun]) -> Option<Self> {
        let find = |m| runs.iter().find(|r| r.mode == m).map(|r| &r.metrics);
        Some(Self::between(find(Mode::EventDriven)?, find(Mode::Periodic)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRow {
    pub model: String,
    pub hourly: EvalReport,
    pub daily: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSummary {
    pub report: DetectionReport,
    pub edge_latency: Vec<Option<u64>>,
    pub fog_latency: Vec<Option<u64>>,
    pub cloud_latency: Vec<Option<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub fingerprint: String,
    pub seed: u64,
    pub runs: Vec<ModeRun>,
    pub comparison: Option<Comparison>,
    pub forecast: Vec<ForecastRow>,
    pub detection: Option<DetectionSummary>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Combines reports of the same scenario and seed. The first run of each
    /// mode wins; the comparison is recomputed.
    pub fn merge(reports: Vec<RunReport>, force: bool) -> Result<RunReport> {
        let mut iter = reports.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| Error::Precondition("no reports to merge".into()))?;
        for r in iter {
            if !force && r.fingerprint != out.fingerprint {
                return Err(Error::Config(format!(
                    "reports come from different scenarios ({} vs {}); pass --force to combine",
                    out.fingerprint, r.fingerprint
                )));
            }
            if !force && r.seed != out.seed {
                return Err(Error::Config(format!(
                    "reports use different seeds ({} vs {}); pass --force to combine",
                    out.seed, r.seed
                )));
            }
            for run in r.runs {
                if out.runs.iter().all(|x| x.mode != run.mode) {
                    out.runs.push(run);
                }
            }
            if out.forecast.is_empty() {
                out.forecast = r.forecast;
            }
            if out.detection.is_none() {
                out.detection = r.detection;
            }
        }
        out.runs.sort_by_key(|r| r.mode == Mode::Periodic);
        out.comparison = Comparison::from_runs(&out.runs);
        Ok(out)
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {}  seed {}", self.fingerprint, self.seed);
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<14}{:>10}{:>12}{:>11}{:>8}{:>11}{:>9}{:>14}",
            "mode", "msgs_up", "after_wu", "bytes_up", "down", "backhaul", "alarms", "energy"
        );
        for r in &self.runs {
            let m = &r.metrics;
            let mode = match r.mode {
                Mode::EventDriven => "event_driven",
                Mode::Periodic => "periodic",
            };
            let _ = writeln!(
                s,
                "{:<14}{:>10}{:>12}{:>11}{:>8}{:>11}{:>9}{:>14.1}",
                mode,
                m.messages_up,
                m.messages_up_after_warmup,
                m.bytes_up,
                m.messages_down,
                m.messages_backhaul,
                m.alarms,
                m.energy_proxy
            );
        }
        if let Some(c) = &self.comparison {
            let f = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(s);
            let _ = writeln!(s, "event / periodic");
            let _ = writeln!(s, "  message ratio  {}", f(c.message_ratio));
            let _ = writeln!(s, "  byte ratio     {}", f(c.byte_ratio));
            let _ = writeln!(s, "  energy ratio   {}", f(c.energy_ratio));
        }
        if !self.forecast.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "{:<16}{:>14}{:>14}", "MAPE %", "hourly", "daily");
            for row in &self.forecast {
                let _ = writeln!(
                    s,
                    "{:<16}{:>14.2}{:>14.2}",
                    row.model, row.hourly.mape_percent, row.daily.mape_percent
                );
            }
        }
        if let Some(d) = &self.detection {
            let r = &d.report;
            let lat = |v: &[Option<u64>]| {
                let hits: Vec<u64> = v.iter().flatten().copied().collect();
                if hits.is_empty() {
                    "n/a".to_string()
                } else {
                    format!("{:.2}", hits.iter().sum::<u64>() as f64 / hits.len() as f64)
                }
            };
            let _ = writeln!(s);
            let _ = writeln!(
                s,
                "detection: tp {}  fp {}  misses {}  fp rate {:.6}",
                r.true_positives, r.false_positives, r.misses, r.false_positive_rate
            );
            let _ = writeln!(
                s,
                "mean latency (ticks): edge {}  fog {}  cloud {}",
                lat(&d.edge_latency),
                lat(&d.fog_latency),
                lat(&d.cloud_latency)
            );
        }
        s
    }
}

/// Pooled MAPE of NVAR and the seasonal baseline over every edge, trained
/// on the history and scored by rolling origin over the simulated span.
pub fn forecast_table(
    series: &[Vec<f64>],
    history_len: usize,
    ticks_per_day: usize,
    cfg: &ForecastEvalConfig,
) -> Result<Vec<ForecastRow>> {
    let hist_days = history_len / ticks_per_day;
    let mut pools: [(Vec<f64>, Vec<f64>); 4] = Default::default();
    for v in series {
        let daily: Vec<f64> = v
            .chunks_exact(ticks_per_day)
            .map(|c| c.iter().sum())
            .collect();
        let nvar_h = NvarModel::train_values(&v[..history_len], &cfg.hourly)?;
        let nvar_d = NvarModel::train_values(&daily[..hist_days], &cfg.daily)?;
        let runs = [
            rolling_predictions(&nvar_h, v, history_len, cfg.hourly_horizon)?,
            rolling_predictions(&nvar_d, &daily, hist_days, cfg.daily_horizon)?,
            rolling_predictions(
                &SeasonalNaive { period: cfg.hourly_period },
                v,
                history_len,
                cfg.hourly_horizon,
            )?,
            rolling_predictions(
                &SeasonalNaive { period: cfg.daily_period },
                &daily,
                hist_days,
                cfg.daily_horizon,
            )?,
        ];
        for (pool, (a, p)) in pools.iter_mut().zip(runs) {
            pool.0.extend(a);
            pool.1.extend(p);
        }
    }
    let score = |k: usize| mape(&pools[k].0, &pools[k].1);
    Ok(vec![
        ForecastRow {
            model: "nvar".into(),
            hourly: score(0)?,
            daily: score(1)?,
        },
        ForecastRow {
            model: "seasonal_naive".into(),
            hourly: score(2)?,
            daily: score(3)?,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Scenario {
        Scenario::from_toml_str(
            "seed = 5\ndays = 4\nhistory_days = 14\n[topology]\nedges = 3\nfogs = 1\n",
        )
        .unwrap()
    }

    #[test]
    fn toml_round_trip() {
        let mut s = small();
        s.anomalies.push(AnomalyConfig {
            edge: 1,
            kind: AnomalyKind::Burst,
            start_tick: 10,
            duration_ticks: 2,
            magnitude: 50.0,
        });
        s.sim.inference.initial_tau = f64::INFINITY;
        let text = s.to_toml_string().unwrap();
        assert_eq!(Scenario::from_toml_str(&text).unwrap(), s);
    }

    #[test]
    fn missing_field_is_named() {
        let err = Scenario::from_toml_str("seed = 1\n[topology]\nedges = 3\nfogs = 1\n").unwrap_err();
        assert!(err.to_string().contains("days"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let err = Scenario::from_toml_str(
            "seed = 1\ndays = 2\nbogus = 3\n[topology]\nedges = 3\nfogs = 1\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn sub_seeds_do_not_depend_on_topology_size() {
        let a = small();
        let mut b = small();
        b.topology.edges = 4;
        assert_eq!(a.generator_config(2), b.generator_config(2));
        assert_ne!(a.generator_config(1).seed, a.generator_config(2).seed);
    }

    #[test]
    fn fingerprint_ignores_seed_only() {
        let a = small();
        let mut b = small();
        b.seed = 99;
        assert_eq!(a.fingerprint().unwrap(), b.fingerprint().unwrap());
        b.days = 5;
        assert_ne!(a.fingerprint().unwrap(), b.fingerprint().unwrap());
    }

    #[test]
    fn both_modes_give_a_comparison() {
        let s = small();
        let (r, logs) = s
            .execute(&[Mode::EventDriven, Mode::Periodic], Path::new("."))
            .unwrap();
        assert!(r.comparison.is_some());
        assert_eq!(logs.len(), 2);
        let (single, _) = s.execute(&[Mode::Periodic], Path::new(".")).unwrap();
        assert!(single.comparison.is_none());
        let back = RunReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn merge_rejects_mixed_seeds_without_force() {
        let s = small();
        let (a, _) = s.execute(&[Mode::EventDriven], Path::new(".")).unwrap();
        let mut t = small();
        t.seed = 6;
        let (b, _) = t.execute(&[Mode::Periodic], Path::new(".")).unwrap();
        assert!(RunReport::merge(vec![a.clone(), b.clone()], false).is_err());
        let m = RunReport::merge(vec![a, b], true).unwrap();
        assert!(m.comparison.is_some());
    }
}

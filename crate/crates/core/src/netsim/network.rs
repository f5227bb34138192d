use std::collections::{BTreeMap, VecDeque};

use super::{
    AlarmReason, Channel, DailyModel, Delivery, DetectionEvent, Event, Layer, Message, Mode,
    NodeId, Payload, SimConfig, SimMetrics, Topology,
};
use crate::anomaly::{SigmaDetector, Verdict};
use crate::error::{Error, Result};
use crate::forecast::{mape, Forecaster};
use crate::inference::{prediction_error, propagate_threshold, PrecisionState, ThresholdState};

/// Gated reporter shared by edges, fogs and the cloud.
#[derive(Debug, Clone)]
struct Inference {
    precision: PrecisionState,
    threshold: ThresholdState,
}

impl Inference {
    /// Updates precision and threshold with `eps` and returns the weighted
    /// error.
    fn observe(&mut self, eps: f64, frozen: bool) -> f64 {
        self.precision = self.precision.update(eps);
        let w = self.precision.weighted_error(eps);
        self.threshold = if frozen {
            self.threshold.tick_frozen()
        } else {
            self.threshold.update(w)
        };
        w
    }
}

#[derive(Debug, Clone)]
struct EdgeNode {
    id: NodeId,
    parent: NodeId,
    detector: SigmaDetector,
    window: VecDeque<f64>,
    last_pred: f64,
    hint: f64,
    inf: Inference,
    reading_acc: f64,
    reading_ticks: u64,
}

/// A parent's view of one child's daily-average series.
#[derive(Debug, Clone)]
struct ChildView {
    id: NodeId,
    model: DailyModel,
    history: Vec<f64>,
    day_preds: BTreeMap<u64, f64>,
    last_w: Option<f64>,
    readings: Vec<f64>,
    recv_ewma: f64,
}

impl ChildView {
    fn new(id: NodeId, model: DailyModel, history: Vec<f64>) -> Self {
        Self {
            id,
            model,
            history,
            day_preds: BTreeMap::new(),
            last_w: None,
            readings: Vec::new(),
            recv_ewma: 0.0,
        }
    }

    /// Closes a day: raw readings win, then the prediction corrected by the
    /// last weighted error, then the bare prediction.
    fn close_day(&mut self, day: u64, gain: f64) -> (f64, f64) {
        let pred = self.day_preds.remove(&day).unwrap_or_else(|| {
            *self.history.last().expect("history is never empty")
        });
        let belief = if !self.readings.is_empty() {
            self.readings.iter().sum::<f64>() / self.readings.len() as f64
        } else if let Some(w) = self.last_w {
            (pred + gain * w).max(0.0)
        } else {
            pred
        };
        self.history.push(belief);
        self.readings.clear();
        self.last_w = None;
        (pred, belief)
    }

    fn receive_error(&mut self, w: f64, alpha: f64) {
        self.last_w = Some(w);
        self.recv_ewma = alpha * self.recv_ewma + (1.0 - alpha) * w.abs();
    }

    /// Mean of the `days` daily values starting at `first_day`, where the
    /// history currently ends just before `known_days`.
    fn forecast_mean(&self, first_day: u64, known_days: u64, days: u64) -> Result<f64> {
        let gap = first_day.saturating_sub(known_days) as usize;
        let f = self.model.predict(&self.history, gap + days as usize)?;
        let tail = &f[gap..];
        Ok(tail.iter().sum::<f64>() / tail.len() as f64)
    }
}

#[derive(Debug, Clone)]
struct FogNode {
    id: NodeId,
    children: Vec<ChildView>,
    cloud_pred: f64,
    hint: f64,
    inf: Inference,
    detector: SigmaDetector,
    backhaul: Vec<f64>,
}

#[derive(Debug, Clone)]
struct CloudNode {
    id: NodeId,
    fogs: Vec<ChildView>,
    inf: Inference,
}

/// Channel plus accounting. Every message leaves through `send`.
#[derive(Debug, Clone)]
struct Wire {
    channel: Channel,
    in_flight: BTreeMap<u64, Vec<Message>>,
    metrics: SimMetrics,
    events: Vec<Event>,
    layers: BTreeMap<NodeId, Layer>,
    config: SimConfig,
}

impl Wire {
    fn send(&mut self, payload: Payload, src: NodeId, dst: NodeId, tick: u64) -> Result<()> {
        let (ls, ld) = (self.layers[&src], self.layers[&dst]);
        let upward = ld > ls;
        if payload.is_downward() == upward || ls == ld {
            return Err(Error::Invariant(format!(
                "{} from {src} ({ls:?}) to {dst} ({ld:?}) flows the wrong way",
                payload.kind()
            )));
        }
        let sizes = &self.config.message_sizes;
        let m = &mut self.metrics;
        match payload {
            Payload::PredictionDown { .. } => {
                m.messages_down += 1;
                m.bytes_down += sizes.prediction_down;
            }
            Payload::Alarm { .. } => {
                m.alarms += 1;
                m.bytes_alarm += sizes.alarm;
            }
            Payload::ErrorUp { .. } | Payload::ReadingUp { .. } => {
                let bytes = if matches!(payload, Payload::ErrorUp { .. }) {
                    sizes.error_up
                } else {
                    sizes.reading_up
                };
                if ls == Layer::Edge {
                    m.messages_up += 1;
                    m.bytes_up += bytes;
                    if tick >= m.warmup_ticks {
                        m.messages_up_after_warmup += 1;
                    }
                } else {
                    m.messages_backhaul += 1;
                    m.bytes_backhaul += bytes;
                }
            }
        }
        m.messages_sent += 1;
        let mut msg = Message::new(payload, src, dst, tick);
        let kind = match self.channel.send(&msg, tick) {
            Delivery::Delivered { at } => {
                if at < tick + 1 {
                    return Err(Error::Invariant(format!(
                        "message sent at {tick} would arrive at {at}"
                    )));
                }
                m.delivered += 1;
                msg.delivered_at = Some(at);
                self.in_flight.entry(at).or_default().push(msg);
                payload.kind().to_string()
            }
            Delivery::Lost => {
                m.lost += 1;
                format!("lost:{}", payload.kind())
            }
        };
        if self.config.record_events {
            self.events.push(Event {
                tick,
                src,
                dst,
                kind,
                value: payload.value(),
            });
        }
        Ok(())
    }

    fn detect(&mut self, tick: u64, node: NodeId, reason: AlarmReason, origin: NodeId) {
        let layer = self.layers[&node];
        self.metrics.detection_events.push(DetectionEvent {
            tick,
            node,
            layer,
            reason,
            origin,
        });
    }
}

#[derive(Debug, Clone)]
struct Attached {
    series: Vec<Vec<f64>>,
    history_len: usize,
    edges: Vec<EdgeNode>,
    fogs: Vec<FogNode>,
    cloud: CloudNode,
    /// Ground-truth daily means per edge for the simulated span.
    truth_daily: Vec<Vec<f64>>,
    fog_pairs: (Vec<f64>, Vec<f64>),
    cloud_pairs: (Vec<f64>, Vec<f64>),
    next_tick: u64,
}

/// A built network. Consumption series must be attached before stepping.
#[derive(Debug, Clone)]
pub struct Network {
    topology: Topology,
    wire: Wire,
    state: Option<Attached>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn daily_means(values: &[f64], tpd: usize) -> Vec<f64> {
    values.chunks_exact(tpd).map(mean).collect()
}

impl Network {
    pub fn build(topology: Topology, config: SimConfig) -> Result<Self> {
        config.validate()?;
        let mut layers = BTreeMap::new();
        layers.insert(topology.cloud(), Layer::Cloud);
        for f in topology.fogs() {
            layers.insert(f, Layer::Fog);
        }
        for e in topology.edges() {
            layers.insert(e, Layer::Edge);
        }
        let warmup = u64::from(config.inference.warmup);
        let metrics = SimMetrics::new(config.mode, topology.edge_count(), warmup);
        Ok(Self {
            wire: Wire {
                channel: Channel::new(config.channel.clone())?,
                in_flight: BTreeMap::new(),
                metrics,
                events: Vec::new(),
                layers,
                config,
            },
            topology,
            state: None,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn config(&self) -> &SimConfig {
        &self.wire.config
    }

    pub fn metrics(&self) -> &SimMetrics {
        &self.wire.metrics
    }

    /// Number of ticks the attached series cover beyond their history.
    pub fn ticks(&self) -> Option<u64> {
        self.state
            .as_ref()
            .map(|s| (s.series[0].len() - s.history_len) as u64)
    }

    /// Assigns one series per edge, in [`Topology::edges`] order. The first
    /// `history_len` samples are history: they train the parents'
    /// forecasters and prime detectors and trailing windows. Tick 0 reads
    /// sample `history_len`.
    pub fn attach(&mut self, series: Vec<Vec<f64>>, history_len: usize) -> Result<()> {
        let cfg = &self.wire.config;
        let tpd = cfg.ticks_per_day as usize;
        let edge_ids = self.topology.edges();
        if series.len() != edge_ids.len() {
            return Err(Error::Config(format!(
                "{} series supplied for {} edges",
                series.len(),
                edge_ids.len()
            )));
        }
        if history_len % tpd != 0 {
            return Err(Error::Config(format!(
                "history length {history_len} is not a whole number of days"
            )));
        }
        let len = series[0].len();
        if series.iter().any(|s| s.len() != len) {
            return Err(Error::Config("edge series differ in length".into()));
        }
        if len <= history_len {
            return Err(Error::InsufficientData {
                needed: history_len + 1,
                available: len,
            });
        }
        if let Some(x) = series.iter().flatten().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::Config(format!("consumption sample {x} is invalid")));
        }
        let min_days = cfg.fog_forecaster.min_history().max(cfg.cloud_forecaster.min_history());
        if history_len / tpd < min_days.max(1) {
            return Err(Error::InsufficientData {
                needed: min_days * tpd,
                available: history_len,
            });
        }

        let inf = || -> Result<Inference> {
            Ok(Inference {
                precision: cfg.inference.precision_state()?,
                threshold: cfg.inference.threshold_state()?,
            })
        };

        let mut edges = Vec::with_capacity(edge_ids.len());
        let mut hist_daily = BTreeMap::new();
        for (&id, s) in edge_ids.iter().zip(&series) {
            let hist = &s[..history_len];
            let mut detector = cfg.edge_detector.build()?;
            for &x in hist {
                detector.update(x);
            }
            let mut window: VecDeque<f64> = hist[history_len - tpd..].iter().copied().collect();
            let last_pred = mean(window.make_contiguous());
            edges.push(EdgeNode {
                id,
                parent: self.topology.parent(id).expect("validated"),
                detector,
                window,
                last_pred,
                hint: 0.0,
                inf: inf()?,
                reading_acc: 0.0,
                reading_ticks: 0,
            });
            hist_daily.insert(id, daily_means(hist, tpd));
        }

        let mut fogs = Vec::new();
        let mut cloud_views = Vec::new();
        for fog in self.topology.fogs() {
            let mut children = Vec::new();
            for &c in self.topology.children(fog) {
                let h = hist_daily[&c].clone();
                children.push(ChildView::new(c, cfg.fog_forecaster.train(&h)?, h));
            }
            let days = children[0].history.len();
            let regional: Vec<f64> = (0..days)
                .map(|d| children.iter().map(|c| c.history[d]).sum::<f64>() / children.len() as f64)
                .collect();
            let mut detector = cfg.fog_detector.build()?;
            for &x in &regional {
                detector.update(x);
            }
            cloud_views.push(ChildView::new(
                fog,
                cfg.cloud_forecaster.train(&regional)?,
                regional.clone(),
            ));
            fogs.push(FogNode {
                id: fog,
                children,
                cloud_pred: mean(&regional),
                hint: 0.0,
                inf: inf()?,
                detector,
                backhaul: Vec::new(),
            });
        }
        let cloud = CloudNode {
            id: self.topology.cloud(),
            fogs: cloud_views,
            inf: inf()?,
        };
        let truth_daily = series
            .iter()
            .map(|s| daily_means(&s[history_len..], tpd))
            .collect();
        self.state = Some(Attached {
            series,
            history_len,
            edges,
            fogs,
            cloud,
            truth_daily,
            fog_pairs: (Vec::new(), Vec::new()),
            cloud_pairs: (Vec::new(), Vec::new()),
            next_tick: 0,
        });
        Ok(())
    }

    /// Advances one tick: deliveries, edges, fogs, cloud, then downward
    /// predictions. Returns the messages sent during the tick.
    pub fn step(&mut self, tick: u64) -> Result<Vec<Event>> {
        let st = self
            .state
            .as_mut()
            .ok_or_else(|| Error::Lifecycle("no consumption series attached".into()))?;
        if tick != st.next_tick {
            return Err(Error::Lifecycle(format!(
                "expected tick {}, got {tick}",
                st.next_tick
            )));
        }
        let span = (st.series[0].len() - st.history_len) as u64;
        if tick >= span {
            return Err(Error::Lifecycle(format!(
                "tick {tick} is past the end of the attached series ({span} ticks)"
            )));
        }
        let wire = &mut self.wire;
        wire.events.clear();
        deliver(st, wire, tick)?;
        edge_phase(st, wire, tick)?;
        fog_phase(st, wire, tick)?;
        cloud_phase(st, wire, tick)?;
        prediction_phase(st, wire, tick)?;
        st.next_tick += 1;
        wire.metrics.ticks = st.next_tick;
        let m = &wire.metrics;
        if m.delivered + m.lost != m.messages_sent {
            return Err(Error::Invariant("delivered + lost != messages sent".into()));
        }
        Ok(std::mem::take(&mut wire.events))
    }

    /// Steps through every remaining tick, calling `on_events` after each,
    /// and returns the final metrics.
    pub fn run_with(&mut self, mut on_events: impl FnMut(&[Event])) -> Result<SimMetrics> {
        let ticks = self
            .ticks()
            .ok_or_else(|| Error::Lifecycle("no consumption series attached".into()))?;
        let start = self.state.as_ref().map_or(0, |s| s.next_tick);
        for t in start..ticks {
            let events = self.step(t)?;
            on_events(&events);
        }
        Ok(self.finish())
    }

    /// Metrics so far, with energy and forecast reports filled in.
    pub fn finish(&self) -> SimMetrics {
        let mut m = self.wire.metrics.clone();
        let e = &self.wire.config.energy;
        m.energy_proxy = e.e_tx * m.messages_sent as f64 + e.e_cpu * m.node_updates as f64;
        if let Some(st) = &self.state {
            m.fog_forecast = mape(&st.fog_pairs.0, &st.fog_pairs.1).ok();
            m.cloud_forecast = mape(&st.cloud_pairs.0, &st.cloud_pairs.1).ok();
        }
        m
    }
}

/// Builds a network, attaches the series and runs it to the end.
pub fn run(
    topology: Topology,
    config: SimConfig,
    series: Vec<Vec<f64>>,
    history_len: usize,
) -> Result<SimMetrics> {
    let mut net = Network::build(topology, config)?;
    net.attach(series, history_len)?;
    net.run_with(|_| {})
}

fn deliver(st: &mut Attached, wire: &mut Wire, tick: u64) -> Result<()> {
    let Some(batch) = wire.in_flight.remove(&tick) else {
        return Ok(());
    };
    let alpha = wire.config.inference.alpha;
    for msg in batch {
        match wire.layers[&msg.dst] {
            Layer::Edge => {
                let edge = st
                    .edges
                    .iter_mut()
                    .find(|e| e.id == msg.dst)
                    .expect("known edge");
                if let Payload::PredictionDown {
                    predicted_value,
                    threshold_hint,
                } = msg.payload
                {
                    edge.last_pred = predicted_value;
                    edge.hint = threshold_hint;
                }
            }
            Layer::Fog => {
                let fog = st.fogs.iter_mut().find(|f| f.id == msg.dst).expect("known fog");
                match msg.payload {
                    Payload::PredictionDown {
                        predicted_value,
                        threshold_hint,
                    } => {
                        fog.cloud_pred = predicted_value;
                        fog.hint = threshold_hint;
                    }
                    Payload::ErrorUp { weighted_error } => {
                        child_of(&mut fog.children, msg.src).receive_error(weighted_error, alpha);
                    }
                    Payload::ReadingUp { value } => {
                        let per_tick = value / wire.config.reporting_interval as f64;
                        child_of(&mut fog.children, msg.src).readings.push(per_tick);
                        fog.backhaul.push(per_tick);
                    }
                    Payload::Alarm { reason, origin } => {
                        let fog_id = fog.id;
                        wire.detect(tick, fog_id, reason, origin);
                        wire.send(msg.payload, fog_id, st.cloud.id, tick)?;
                    }
                }
            }
            Layer::Cloud => {
                let cloud = &mut st.cloud;
                match msg.payload {
                    Payload::ErrorUp { weighted_error } => {
                        child_of(&mut cloud.fogs, msg.src).receive_error(weighted_error, alpha);
                    }
                    Payload::ReadingUp { value } => {
                        child_of(&mut cloud.fogs, msg.src).readings.push(value);
                    }
                    Payload::Alarm { reason, origin } => {
                        wire.detect(tick, cloud.id, reason, origin);
                    }
                    Payload::PredictionDown { .. } => {
                        return Err(Error::Invariant("prediction delivered to the cloud".into()))
                    }
                }
            }
        }
    }
    Ok(())
}

fn child_of(views: &mut [ChildView], id: NodeId) -> &mut ChildView {
    views.iter_mut().find(|c| c.id == id).expect("known child")
}

/// Gate for a reporter with own threshold `tau`. Frozen thresholds are
/// fixed values and ignore neighbours.
fn gate(cfg: &SimConfig, tau: f64, below: f64, above: f64) -> Result<f64> {
    let p = &cfg.inference;
    let blended = if p.freeze_thresholds {
        tau
    } else {
        let pick = |x: f64| if x > 0.0 { x } else { tau };
        propagate_threshold(tau, pick(below), pick(above), p.gamma)?
    };
    Ok(p.gate_margin * blended)
}

fn edge_phase(st: &mut Attached, wire: &mut Wire, tick: u64) -> Result<()> {
    let idx = st.history_len + tick as usize;
    let tpd = wire.config.ticks_per_day as usize;
    let frozen = wire.config.inference.freeze_thresholds;
    for (edge, series) in st.edges.iter_mut().zip(&st.series) {
        let x = series[idx];
        if edge.detector.update(x) == Verdict::Anomaly {
            wire.detect(tick, edge.id, AlarmReason::PipeBreak, edge.id);
            let alarm = Payload::Alarm {
                reason: AlarmReason::PipeBreak,
                origin: edge.id,
            };
            wire.send(alarm, edge.id, edge.parent, tick)?;
        }
        if edge.window.len() == tpd {
            edge.window.pop_front();
        }
        edge.window.push_back(x);
        let avg = mean(edge.window.make_contiguous());
        let eps = prediction_error(avg, edge.last_pred)?;
        let w = edge.inf.observe(eps, frozen);
        wire.metrics.node_updates += 1;
        match wire.config.mode {
            Mode::EventDriven => {
                let th = edge.inf.threshold;
                if th.gating_enabled() && w.abs() > gate(&wire.config, th.tau(), th.tau(), edge.hint)? {
                    wire.send(Payload::ErrorUp { weighted_error: w }, edge.id, edge.parent, tick)?;
                }
            }
            Mode::Periodic => {
                edge.reading_acc += x;
                edge.reading_ticks += 1;
                if edge.reading_ticks == wire.config.reporting_interval {
                    let value = edge.reading_acc;
                    edge.reading_acc = 0.0;
                    edge.reading_ticks = 0;
                    wire.send(Payload::ReadingUp { value }, edge.id, edge.parent, tick)?;
                }
            }
        }
    }
    Ok(())
}

fn fog_phase(st: &mut Attached, wire: &mut Wire, tick: u64) -> Result<()> {
    let cfg = wire.config.clone();
    let tpd = cfg.ticks_per_day;
    let interval = cfg.reporting_interval;
    let cloud = st.cloud.id;
    let forward = cfg.mode == Mode::Periodic
        && tick % interval == (cfg.channel.delay_ticks - 1) % interval;
    for fog in st.fogs.iter_mut() {
        if forward && !fog.backhaul.is_empty() {
            let value = mean(&fog.backhaul);
            fog.backhaul.clear();
            wire.send(Payload::ReadingUp { value }, fog.id, cloud, tick)?;
        }
        if tick == 0 || tick % tpd != 0 {
            continue;
        }
        let day = tick / tpd - 1;
        let mut beliefs = Vec::with_capacity(fog.children.len());
        for child in fog.children.iter_mut() {
            let (pred, belief) = child.close_day(day, cfg.belief_gain);
            let e = st
                .edges
                .iter()
                .position(|e| e.id == child.id)
                .expect("known edge");
            st.fog_pairs.0.push(st.truth_daily[e][day as usize]);
            st.fog_pairs.1.push(pred);
            beliefs.push(belief);
        }
        let regional = mean(&beliefs);
        if fog.detector.update(regional) == Verdict::Anomaly {
            wire.detect(tick, fog.id, AlarmReason::StatsAnomaly, fog.id);
            let alarm = Payload::Alarm {
                reason: AlarmReason::StatsAnomaly,
                origin: fog.id,
            };
            wire.send(alarm, fog.id, cloud, tick)?;
        }
        let eps = prediction_error(regional, fog.cloud_pred)?;
        let w = fog.inf.observe(eps, cfg.inference.freeze_thresholds);
        wire.metrics.node_updates += 1;
        if cfg.mode == Mode::EventDriven {
            let th = fog.inf.threshold;
            let below = mean(&fog.children.iter().map(|c| c.recv_ewma).collect::<Vec<_>>());
            if th.gating_enabled() && w.abs() > gate(&cfg, th.tau(), below, fog.hint)? {
                wire.send(Payload::ErrorUp { weighted_error: w }, fog.id, cloud, tick)?;
            }
        }
    }
    Ok(())
}

fn cloud_phase(st: &mut Attached, wire: &mut Wire, tick: u64) -> Result<()> {
    let tpd = wire.config.ticks_per_day;
    // Fog reports for a day leave at the next day boundary; wait for them.
    let lag = wire.config.channel.delay_ticks.min(tpd - 1);
    if tick < tpd + lag || tick % tpd != lag {
        return Ok(());
    }
    let day = (tick - lag) / tpd - 1;
    let mut preds = Vec::new();
    let mut beliefs = Vec::new();
    for (fi, view) in st.cloud.fogs.iter_mut().enumerate() {
        let (pred, belief) = view.close_day(day, wire.config.belief_gain);
        let fog = &st.fogs[fi];
        let actual = fog
            .children
            .iter()
            .map(|c| {
                let e = st.edges.iter().position(|e| e.id == c.id).expect("known edge");
                st.truth_daily[e][day as usize]
            })
            .sum::<f64>()
            / fog.children.len() as f64;
        st.cloud_pairs.0.push(actual);
        st.cloud_pairs.1.push(pred);
        preds.push(pred);
        beliefs.push(belief);
    }
    let eps = prediction_error(mean(&beliefs), mean(&preds))?;
    st.cloud
        .inf
        .observe(eps, wire.config.inference.freeze_thresholds);
    wire.metrics.node_updates += 1;
    Ok(())
}

fn prediction_phase(st: &mut Attached, wire: &mut Wire, tick: u64) -> Result<()> {
    let cfg = wire.config.clone();
    let tpd = cfg.ticks_per_day;
    let hist_days = (st.history_len as u64) / tpd;
    let today = tick / tpd;
    if tick % cfg.cloud_prediction_interval == 0 {
        let days = (cfg.cloud_prediction_interval / tpd).max(1);
        let cloud_id = st.cloud.id;
        for view in st.cloud.fogs.iter_mut() {
            let known = view.history.len() as u64 - hist_days;
            let value = view.forecast_mean(today, known, days)?;
            for d in today..today + days {
                view.day_preds.insert(d, value);
            }
            let payload = Payload::PredictionDown {
                predicted_value: value,
                threshold_hint: view.recv_ewma,
            };
            wire.send(payload, cloud_id, view.id, tick)?;
        }
    }
    if tick % cfg.fog_prediction_interval == 0 {
        let days = (cfg.fog_prediction_interval / tpd).max(1);
        for fog in st.fogs.iter_mut() {
            for child in fog.children.iter_mut() {
                let known = child.history.len() as u64 - hist_days;
                let value = child.forecast_mean(today, known, days)?;
                for d in today..today + days {
                    child.day_preds.insert(d, value);
                }
                let payload = Payload::PredictionDown {
                    predicted_value: value,
                    threshold_hint: child.recv_ewma,
                };
                wire.send(payload, fog.id, child.id, tick)?;
            }
        }
    }
    Ok(())
}

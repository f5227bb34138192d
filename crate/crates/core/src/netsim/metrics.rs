use serde::{Deserialize, Serialize};

use super::{AlarmReason, Layer, Mode, NodeId};
use crate::forecast::EvalReport;

/// An alarm as seen by one node: raised there (edge, fog statistics) or
/// received there (relayed pipe-break alarms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub tick: u64,
    pub node: NodeId,
    pub layer: Layer,
    pub reason: AlarmReason,
    /// Node that raised the alarm originally.
    pub origin: NodeId,
}

/// Counters for one run.
///
/// `messages_up` counts edge reports only (`ErrorUp` or `ReadingUp`), which
/// is the quantity the event-driven and periodic modes are compared on.
/// Fog-to-cloud reports land in `messages_backhaul`, alarms at every hop in
/// `alarms`. Every message passes through the channel, so
/// `messages_sent = up + backhaul + alarms + down = delivered + lost`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub mode: Mode,
    pub ticks: u64,
    pub edges: usize,
    pub warmup_ticks: u64,
    pub messages_up: u64,
    pub messages_up_after_warmup: u64,
    pub messages_backhaul: u64,
    pub messages_down: u64,
    pub alarms: u64,
    pub bytes_up: u64,
    pub bytes_backhaul: u64,
    pub bytes_down: u64,
    pub bytes_alarm: u64,
    pub messages_sent: u64,
    pub delivered: u64,
    pub lost: u64,
    pub node_updates: u64,
    pub energy_proxy: f64,
    pub fog_forecast: Option<EvalReport>,
    pub cloud_forecast: Option<EvalReport>,
    pub detection_events: Vec<DetectionEvent>,
}

impl SimMetrics {
    pub(crate) fn new(mode: Mode, edges: usize, warmup_ticks: u64) -> Self {
        Self {
            mode,
            ticks: 0,
            edges,
            warmup_ticks,
            messages_up: 0,
            messages_up_after_warmup: 0,
            messages_backhaul: 0,
            messages_down: 0,
            alarms: 0,
            bytes_up: 0,
            bytes_backhaul: 0,
            bytes_down: 0,
            bytes_alarm: 0,
            messages_sent: 0,
            delivered: 0,
            lost: 0,
            node_updates: 0,
            energy_proxy: 0.0,
            fog_forecast: None,
            cloud_forecast: None,
            detection_events: Vec::new(),
        }
    }

    pub fn total_bytes(&self) -> u64 {
        self.bytes_up + self.bytes_backhaul + self.bytes_down + self.bytes_alarm
    }
}

/// Latency of each ground-truth onset `(edge, tick)` at `layer`: the first
/// detection event at that layer originating from the edge, at or after
/// the onset, minus the onset. Events at fog and cloud carry their arrival
/// tick, so channel delay is included. `None` marks a miss.
pub fn detection_latency(
    metrics: &SimMetrics,
    onsets: &[(NodeId, u64)],
    layer: Layer,
) -> Vec<Option<u64>> {
    onsets
        .iter()
        .map(|&(edge, onset)| {
            metrics
                .detection_events
                .iter()
                .filter(|e| e.layer == layer && e.origin == edge && e.tick >= onset)
                .map(|e| e.tick - onset)
                .min()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_events(events: Vec<DetectionEvent>) -> SimMetrics {
        let mut m = SimMetrics::new(Mode::EventDriven, 1, 0);
        m.detection_events = events;
        m
    }

    fn ev(tick: u64, node: NodeId, layer: Layer, origin: NodeId) -> DetectionEvent {
        DetectionEvent {
            tick,
            node,
            layer,
            reason: AlarmReason::PipeBreak,
            origin,
        }
    }

    #[test]
    fn alarm_at_onset_counted_at_edge() {
        let m = with_events(vec![ev(100, 5, Layer::Edge, 5)]);
        assert_eq!(detection_latency(&m, &[(5, 100)], Layer::Edge), [Some(0)]);
    }

    #[test]
    fn fog_latency_includes_delay() {
        let m = with_events(vec![ev(100, 5, Layer::Edge, 5), ev(102, 1, Layer::Fog, 5)]);
        assert_eq!(detection_latency(&m, &[(5, 100)], Layer::Fog), [Some(2)]);
    }

    #[test]
    fn no_alarm_is_a_miss() {
        let m = with_events(vec![ev(50, 5, Layer::Edge, 5), ev(100, 6, Layer::Edge, 6)]);
        assert_eq!(detection_latency(&m, &[(5, 100)], Layer::Edge), [None]);
    }
}

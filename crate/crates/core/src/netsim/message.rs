use serde::{Deserialize, Serialize};

use super::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlarmReason {
    PipeBreak,
    StatsAnomaly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    /// Parent to child: expected average consumption per interval, plus
    /// the parent's view of this child's reported error magnitude.
    PredictionDown {
        predicted_value: f64,
        threshold_hint: f64,
    },
    /// Child to parent: a precision-weighted prediction error.
    ErrorUp { weighted_error: f64 },
    /// Child to parent: raw consumption over one reporting interval
    /// (periodic baseline only).
    ReadingUp { value: f64 },
    /// Child to parent, never gated. `origin` is the edge that raised it.
    Alarm { reason: AlarmReason, origin: NodeId },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::PredictionDown { .. } => "prediction_down",
            Payload::ErrorUp { .. } => "error_up",
            Payload::ReadingUp { .. } => "reading_up",
            Payload::Alarm {
                reason: AlarmReason::PipeBreak,
                ..
            } => "alarm_pipe_break",
            Payload::Alarm {
                reason: AlarmReason::StatsAnomaly,
                ..
            } => "alarm_stats_anomaly",
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Payload::PredictionDown {
                predicted_value, ..
            } => predicted_value,
            Payload::ErrorUp { weighted_error } => weighted_error,
            Payload::ReadingUp { value } => value,
            Payload::Alarm { origin, .. } => f64::from(origin),
        }
    }

    pub fn is_downward(&self) -> bool {
        matches!(self, Payload::PredictionDown { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub payload: Payload,
    pub src: NodeId,
    pub dst: NodeId,
    pub sent_at: u64,
    pub delivered_at: Option<u64>,
}

impl Message {
    pub fn new(payload: Payload, src: NodeId, dst: NodeId, sent_at: u64) -> Self {
        Self {
            payload,
            src,
            dst,
            sent_at,
            delivered_at: None,
        }
    }
}

/// One line of the event log: `tick,src,dst,kind,value`.
///
/// Every message appears once, at its send tick; a message the channel
/// dropped carries the kind prefixed with `lost:`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub tick: u64,
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: String,
    pub value: f64,
}

impl Event {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.tick, self.src, self.dst, self.kind, self.value
        )
    }
}

pub const EVENT_LOG_HEADER: &str = "tick,src,dst,kind,value";

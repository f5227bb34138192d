//! Lock-step simulation of the edge / fog / cloud hierarchy.

mod channel;
mod config;
mod message;
mod metrics;
mod network;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use channel::{channel_send, Channel, ChannelModel, Delivery};
pub use config::{
    DailyModel, DetectorConfig, EnergyModel, ForecasterConfig, MessageSizes, Mode, SimConfig,
};
pub use message::{AlarmReason, Event, Message, Payload, EVENT_LOG_HEADER};
pub use metrics::{detection_latency, DetectionEvent, SimMetrics};
pub use network::{run, Network};

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Edge,
    Fog,
    Cloud,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub layer: Layer,
    pub parent: Option<NodeId>,
}

/// Validated three-layer tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    cloud: NodeId,
    /// Fog id to its edges, both in ascending id order.
    fogs: BTreeMap<NodeId, Vec<NodeId>>,
}

impl Topology {
    pub fn from_nodes(nodes: &[NodeSpec]) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for n in nodes {
            if !ids.insert(n.id) {
                return Err(Error::Topology(format!("duplicate node id {}", n.id)));
            }
        }
        let layer_of: BTreeMap<NodeId, Layer> = nodes.iter().map(|n| (n.id, n.layer)).collect();
        let clouds: Vec<&NodeSpec> = nodes.iter().filter(|n| n.layer == Layer::Cloud).collect();
        let cloud = match clouds.as_slice() {
            [c] => *c,
            [] => return Err(Error::Topology("no cloud node".into())),
            _ => {
                return Err(Error::Topology(format!(
                    "expected exactly one cloud node, found {}",
                    clouds.len()
                )))
            }
        };
        if cloud.parent.is_some() {
            return Err(Error::Topology("the cloud node cannot have a parent".into()));
        }
        let mut fogs: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for n in nodes.iter().filter(|n| n.layer == Layer::Fog) {
            if n.parent != Some(cloud.id) {
                return Err(Error::Topology(format!(
                    "fog node {} must have the cloud as parent",
                    n.id
                )));
            }
            fogs.insert(n.id, Vec::new());
        }
        for n in nodes.iter().filter(|n| n.layer == Layer::Edge) {
            let parent = n
                .parent
                .ok_or_else(|| Error::Topology(format!("edge node {} has no parent", n.id)))?;
            if layer_of.get(&parent) != Some(&Layer::Fog) {
                return Err(Error::Topology(format!(
                    "edge node {} has parent {parent}, which is not a fog node",
                    n.id
                )));
            }
            fogs.get_mut(&parent).expect("fog present").push(n.id);
        }
        if fogs.is_empty() {
            return Err(Error::Topology("no fog nodes".into()));
        }
        if let Some((fog, _)) = fogs.iter().find(|(_, c)| c.is_empty()) {
            return Err(Error::Topology(format!("fog node {fog} has no edge children")));
        }
        for children in fogs.values_mut() {
            children.sort_unstable();
        }
        Ok(Self {
            cloud: cloud.id,
            fogs,
        })
    }

    /// Cloud 0, fogs `1..=fogs`, then edges assigned to fogs in contiguous
    /// blocks; the first `edges % fogs` fogs take one extra edge.
    pub fn balanced(edges: usize, fogs: usize) -> Result<Self> {
        if fogs == 0 {
            return Err(Error::Topology("fog count must be >= 1".into()));
        }
        if edges < fogs {
            return Err(Error::Topology(format!(
                "{edges} edges cannot give each of {fogs} fogs a child"
            )));
        }
        let mut nodes = vec![NodeSpec {
            id: 0,
            layer: Layer::Cloud,
            parent: None,
        }];
        for f in 0..fogs {
            nodes.push(NodeSpec {
                id: (f + 1) as NodeId,
                layer: Layer::Fog,
                parent: Some(0),
            });
        }
        let base = edges / fogs;
        let extra = edges % fogs;
        let mut next = fogs + 1;
        for f in 0..fogs {
            let count = base + usize::from(f < extra);
            for _ in 0..count {
                nodes.push(NodeSpec {
                    id: next as NodeId,
                    layer: Layer::Edge,
                    parent: Some((f + 1) as NodeId),
                });
                next += 1;
            }
        }
        Self::from_nodes(&nodes)
    }

    pub fn cloud(&self) -> NodeId {
        self.cloud
    }

    pub fn fogs(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.fogs.keys().copied()
    }

    pub fn children(&self, fog: NodeId) -> &[NodeId] {
        self.fogs.get(&fog).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All edges, grouped by fog in ascending fog order.
    pub fn edges(&self) -> Vec<NodeId> {
        self.fogs.values().flatten().copied().collect()
    }

    pub fn edge_count(&self) -> usize {
        self.fogs.values().map(Vec::len).sum()
    }

    pub fn fog_count(&self) -> usize {
        self.fogs.len()
    }

    pub fn layer(&self, id: NodeId) -> Option<Layer> {
        if id == self.cloud {
            Some(Layer::Cloud)
        } else if self.fogs.contains_key(&id) {
            Some(Layer::Fog)
        } else if self.fogs.values().any(|c| c.contains(&id)) {
            Some(Layer::Edge)
        } else {
            None
        }
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        if self.fogs.contains_key(&id) {
            return Some(self.cloud);
        }
        self.fogs
            .iter()
            .find(|(_, c)| c.contains(&id))
            .map(|(f, _)| *f)
    }
}

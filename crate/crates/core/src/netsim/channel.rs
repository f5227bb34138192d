use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Message, NodeId};
use crate::error::{Error, Result};
use crate::seed;

/// Lossy link with a fixed delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelModel {
    pub loss_prob: f64,
    pub delay_ticks: u64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            loss_prob: 0.05,
            delay_ticks: 1,
            seed: 0,
        }
    }
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.loss_prob) {
            return Err(Error::Config(format!(
                "channel.loss_prob must lie in [0, 1], got {}",
                self.loss_prob
            )));
        }
        if self.delay_ticks < 1 {
            return Err(Error::Config("channel.delay_ticks must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    Delivered { at: u64 },
    Lost,
}

/// Stateful channel. Each directed link draws losses from its own stream
/// (`seed ^ hash("link/src/dst")`), so traffic on one link never perturbs
/// another.
#[derive(Debug, Clone)]
pub struct Channel {
    model: ChannelModel,
    links: BTreeMap<(NodeId, NodeId), ChaCha8Rng>,
}

impl Channel {
    pub fn new(model: ChannelModel) -> Result<Self> {
        model.validate()?;
        Ok(Self {
            model,
            links: BTreeMap::new(),
        })
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    pub fn send(&mut self, msg: &Message, tick: u64) -> Delivery {
        let seed = self.model.seed;
        let rng = self
            .links
            .entry((msg.src, msg.dst))
            .or_insert_with(|| seed::rng(seed::derive_seed(seed, &format!("link/{}/{}", msg.src, msg.dst))));
        // Always draw, so the stream position depends only on the send count.
        let u: f64 = rng.gen();
        if u < self.model.loss_prob {
            Delivery::Lost
        } else {
            Delivery::Delivered {
                at: tick + self.model.delay_ticks,
            }
        }
    }
}

pub fn channel_send(channel: &mut Channel, msg: &Message, tick: u64) -> Delivery {
    channel.send(msg, tick)
}

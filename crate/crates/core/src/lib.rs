//! Event-driven simulation of a hierarchical (edge/fog/cloud) water-metering
//! network.
//!
//! Layers exchange downward predictions and upward precision-weighted
//! prediction errors, transmit only when adaptive thresholds are crossed,
//! forecast demand with an NVAR model and flag anomalies with a one-sided
//! mean + 3 sigma rule.

pub mod anomaly;
pub mod error;
pub mod forecast;
pub mod inference;
pub mod netsim;
pub mod scenario;
pub mod seed;
pub mod series;
pub mod stats;

pub use error::{Error, Result};

//! Simulation and multi-agent training for UAV relays bridging two
//! low-earth-orbit satellite lanes with hybrid FSO/RF links.

pub mod baselines;
pub mod channel;
pub mod config;
pub mod dynamics;
pub mod energy;
pub mod env;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod marl;
pub mod metrics;
pub mod network;
pub mod scenario;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use geometry::Vec3;
pub use scenario::Scenario;

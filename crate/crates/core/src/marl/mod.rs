//! From-scratch networks, optimizer and the centralized-critic A2C trainer.

pub mod a2c;
pub mod checkpoint;
pub mod critic;
pub mod mlp;
pub mod policy;
pub mod rmsprop;
pub mod trainer;

pub use checkpoint::Checkpoint;
pub use critic::CentralCritic;
pub use mlp::Mlp;
pub use rmsprop::{RmsProp, RmsPropConfig};
pub use trainer::{rollout_greedy, train, Learners, MarlPolicy, Rollout, TrainConfig, TrainOutcome};

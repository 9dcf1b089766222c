//! DDPG from scratch: networks, optimizer, replay and the training loop.

pub mod adam;
pub mod checkpoint;
pub mod ddpg;
pub mod mlp;
pub mod replay;
pub mod train;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, NetworkDoc};
pub use ddpg::{Agent, AgentConfig, Critic, UpdateStats};
pub use mlp::{Activation, ForwardCache, Mlp, MlpGrads};
pub use replay::{ReplayBuffer, Transition};
pub use train::{train, TrainConfig, TrainOutcome};

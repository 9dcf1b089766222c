use super::ddpg::{Agent, AgentConfig, Critic};
use super::mlp::{Activation, Mlp};
use super::train::TrainConfig;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub sizes: Vec<usize>,
    pub output: Activation,
    pub params: Vec<f64>,
}

impl NetworkDoc {
    pub fn from_mlp(net: &Mlp) -> Self {
        Self { sizes: net.sizes.clone(), output: net.output, params: net.flat_params() }
    }

    pub fn to_mlp(&self) -> Result<Mlp> {
        let mut net = Mlp::zeros(&self.sizes, self.output)?;
        net.set_flat_params(&self.params)?;
        Ok(net)
    }
}

/// Saved online networks plus the configuration they were trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub agent: AgentConfig,
    pub actor: NetworkDoc,
    pub critic_trunk: NetworkDoc,
    pub critic_head: NetworkDoc,
    pub train: TrainConfig,
    pub env: EnvConfig,
    pub seed: u64,
}

impl Checkpoint {
    pub fn new(agent: &Agent, train: &TrainConfig, env: &EnvConfig) -> Self {
        Self {
            agent: agent.config.clone(),
            actor: NetworkDoc::from_mlp(&agent.actor),
            critic_trunk: NetworkDoc::from_mlp(&agent.critic.trunk),
            critic_head: NetworkDoc::from_mlp(&agent.critic.head),
            train: train.clone(),
            env: env.clone(),
            seed: train.seed,
        }
    }

    pub fn to_agent(&self) -> Result<Agent> {
        let actor = self.actor.to_mlp()?;
        let critic = Critic { trunk: self.critic_trunk.to_mlp()?, head: self.critic_head.to_mlp()? };
        if actor.input_size() != self.agent.obs_dim || actor.output_size() != self.agent.act_dim {
            return Err(Error::DimensionMismatch { expected: self.agent.obs_dim, got: actor.input_size() });
        }
        Ok(Agent::assemble(self.agent.clone(), actor, critic))
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

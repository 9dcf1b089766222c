use super::ddpg::{Agent, AgentConfig};
use super::replay::{ReplayBuffer, Transition};
use crate::dwa::project_to_feasible;
use crate::env::NavEnv;
use crate::error::{Error, Result};
use crate::reward::{normalize_episode, NormalizationConfig};
use crate::world::StepEvent;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub batch_size: usize,
    pub gamma: f64,
    pub noise_sigma: f64,
    pub tau: f64,
    pub seed: u64,
    pub buffer_capacity: usize,
    pub warmup_steps: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Added to the reward of the step that reaches the goal.
    pub goal_bonus: f64,
    /// Added to the reward of a colliding step.
    pub collision_penalty: f64,
    /// Added to every step's reward.
    pub step_offset: f64,
    pub normalization: NormalizationConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 100,
            steps_per_episode: 100,
            batch_size: 64,
            gamma: 0.99,
            noise_sigma: 0.1,
            tau: 0.005,
            seed: 0,
            buffer_capacity: 100_000,
            warmup_steps: 1000,
            actor_lr: 1e-4,
            critic_lr: 1e-4,
            goal_bonus: 10.0,
            collision_penalty: -10.0,
            step_offset: -1.0,
            normalization: NormalizationConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        if self.steps_per_episode == 0 || self.batch_size == 0 || self.buffer_capacity == 0 {
            return Err(Error::InvalidConfig("counts must be positive".into()));
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 {
            return Err(Error::InvalidConfig("noise_sigma must be non-negative".into()));
        }
        Ok(())
    }

    pub fn agent_config(&self, obs_dim: usize) -> AgentConfig {
        AgentConfig {
            actor_lr: self.actor_lr,
            critic_lr: self.critic_lr,
            gamma: self.gamma,
            tau: self.tau,
            ..AgentConfig::new(obs_dim, 2)
        }
    }

    pub fn shaping(&self, event: StepEvent) -> f64 {
        self.step_offset
            + match event {
                StepEvent::GoalReached => self.goal_bonus,
                StepEvent::Collision => self.collision_penalty,
                StepEvent::None => 0.0,
            }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub agent: Agent,
    /// Summed training reward per episode.
    pub curve: Vec<f64>,
    /// How each episode ended; `None` is the step limit.
    pub outcomes: Vec<StepEvent>,
    pub total_steps: usize,
}

impl TrainOutcome {
    /// Percentage of the last `n` episodes that reached the goal.
    pub fn final_success_rate(&self, n: usize) -> f64 {
        let tail = &self.outcomes[self.outcomes.len().saturating_sub(n)..];
        if tail.is_empty() {
            return 0.0;
        }
        100.0 * tail.iter().filter(|e| **e == StepEvent::GoalReached).count() as f64 / tail.len() as f64
    }
}

/// DDPG over the environment's episodes. Every executed command goes through
/// the velocity window and is checked against the dynamic limits.
pub fn train(env: &mut NavEnv, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    env.config.max_steps = cfg.steps_per_episode;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let obs_dim = env.config.dwa.observation_len();
    let mut agent = Agent::new(cfg.agent_config(obs_dim), &mut rng)?;
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut curve = Vec::with_capacity(cfg.episodes);
    let mut outcomes = Vec::with_capacity(cfg.episodes);
    let mut total_steps = 0usize;
    let limits = env.config.dwa.limits;
    let dt = env.config.dwa.dt;

    for _ in 0..cfg.episodes {
        let mut obs = env.reset()?.values;
        let mut episode: Vec<Transition> = Vec::with_capacity(cfg.steps_per_episode);
        let mut max_cover = f64::NEG_INFINITY;
        let mut ret = 0.0;
        let outcome = loop {
            let raw = if total_steps < cfg.warmup_steps {
                vec![rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)]
            } else {
                agent.act(&obs, cfg.noise_sigma, &mut rng)?
            };
            let now = *env.robot();
            let cmd = project_to_feasible([raw[0], raw[1]], env.window());
            if !limits.permits(now.v, now.omega, cmd, dt) {
                return Err(Error::InfeasibleCommand { v: cmd.v, omega: cmd.omega });
            }
            let tr = env.step(cmd)?;
            let next = env.observe().values;
            let reward = tr.reward.total + cfg.shaping(tr.event);
            max_cover = max_cover.max(tr.reward.r_cover);
            ret += reward;
            let t = Transition {
                obs: std::mem::replace(&mut obs, next.clone()),
                action: raw,
                reward,
                next_obs: next,
                done: tr.event != StepEvent::None,
            };
            if cfg.normalization.enabled {
                episode.push(t);
            } else {
                buffer.push(t);
            }
            total_steps += 1;
            if total_steps > cfg.warmup_steps && buffer.len() >= cfg.batch_size {
                let batch = buffer.sample(cfg.batch_size, &mut rng)?;
                agent.update(&batch)?;
            }
            if tr.done {
                break tr.event;
            }
        };
        if cfg.normalization.enabled {
            let rewards: Vec<f64> = episode.iter().map(|t| t.reward).collect();
            let scaled = normalize_episode(&rewards, max_cover, env.world().visibility(), &cfg.normalization)?;
            ret = scaled.iter().sum();
            for (mut t, r) in episode.into_iter().zip(scaled) {
                t.reward = r;
                buffer.push(t);
            }
        }
        curve.push(ret);
        outcomes.push(outcome);
    }
    Ok(TrainOutcome { agent, curve, outcomes, total_steps })
}

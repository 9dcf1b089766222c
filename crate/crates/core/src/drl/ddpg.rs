use super::adam::Adam;
use super::mlp::{Activation, ForwardCache, Mlp};
use super::replay::Transition;
use crate::error::{Error, Result};
use ndarray::{concatenate, s, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub actor_hidden: Vec<usize>,
    /// Width of the critic's observation layer and of the layer after the
    /// action joins.
    pub critic_hidden: (usize, usize),
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    pub tau: f64,
}

impl AgentConfig {
    pub fn new(obs_dim: usize, act_dim: usize) -> Self {
        Self {
            obs_dim,
            act_dim,
            actor_hidden: vec![64, 64],
            critic_hidden: (64, 64),
            actor_lr: 1e-4,
            critic_lr: 1e-4,
            gamma: 0.99,
            tau: 0.005,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.obs_dim == 0 || self.act_dim == 0 {
            return Err(Error::InvalidConfig("network dimensions must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::InvalidConfig(format!("tau {} outside (0, 1]", self.tau)));
        }
        Ok(())
    }

    fn actor_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.obs_dim];
        s.extend(&self.actor_hidden);
        s.push(self.act_dim);
        s
    }
}

/// Q(s, a): the observation passes one rectifier layer, then the action is
/// appended and a second network produces the scalar value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Critic {
    pub trunk: Mlp,
    pub head: Mlp,
}

pub struct CriticCache {
    trunk: ForwardCache,
    head: ForwardCache,
}

impl CriticCache {
    pub fn q(&self) -> &Array2<f64> {
        self.head.output()
    }
}

impl Critic {
    fn new<R: Rng>(cfg: &AgentConfig, rng: &mut R) -> Result<Self> {
        let (h1, h2) = cfg.critic_hidden;
        Ok(Self {
            trunk: Mlp::new(&[cfg.obs_dim, h1], Activation::Relu, None, rng)?,
            head: Mlp::new(&[h1 + cfg.act_dim, h2, 1], Activation::Identity, Some(3e-3), rng)?,
        })
    }

    pub fn forward_batch(&self, obs: &Array2<f64>, act: &Array2<f64>) -> Result<CriticCache> {
        let trunk = self.trunk.forward_batch(obs)?;
        let joined = concatenate(Axis(1), &[trunk.output().view(), act.view()])
            .map_err(|_| Error::DimensionMismatch { expected: obs.nrows(), got: act.nrows() })?;
        let head = self.head.forward_batch(&joined)?;
        Ok(CriticCache { trunk, head })
    }

    pub fn q(&self, obs: &[f64], act: &[f64]) -> Result<f64> {
        let o = Array2::from_shape_vec((1, obs.len()), obs.to_vec()).expect("row");
        let a = Array2::from_shape_vec((1, act.len()), act.to_vec()).expect("row");
        Ok(self.forward_batch(&o, &a)?.q()[[0, 0]])
    }

    fn soft_update_from(&mut self, online: &Critic, tau: f64) {
        self.trunk.soft_update_from(&online.trunk, tau);
        self.head.soft_update_from(&online.head, tau);
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut p = self.trunk.params_mut();
        p.extend(self.head.params_mut());
        p
    }

    fn group_sizes(&self) -> Vec<usize> {
        self.trunk.params().iter().chain(self.head.params().iter()).map(|p| p.len()).collect()
    }

    pub fn distance(&self, other: &Critic) -> f64 {
        self.trunk.distance(&other.trunk).hypot(self.head.distance(&other.head))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_objective: f64,
}

/// Deterministic actor-critic with target networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub config: AgentConfig,
    pub actor: Mlp,
    pub critic: Critic,
    pub actor_target: Mlp,
    pub critic_target: Critic,
    pub actor_opt: Adam,
    pub critic_opt: Adam,
}

fn rows(batch: &[&Transition], dim: usize, f: impl Fn(&Transition) -> &[f64]) -> Result<Array2<f64>> {
    let mut data = Vec::with_capacity(batch.len() * dim);
    for t in batch {
        let r = f(t);
        if r.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
        }
        data.extend_from_slice(r);
    }
    Ok(Array2::from_shape_vec((batch.len(), dim), data).expect("shape matches"))
}

impl Agent {
    pub fn new<R: Rng>(config: AgentConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let actor = Mlp::new(&config.actor_sizes(), Activation::Tanh, Some(3e-3), rng)?;
        let critic = Critic::new(&config, rng)?;
        Ok(Self::assemble(config, actor, critic))
    }

    /// Agent with the given online networks, targets copied from them and
    /// fresh optimizer state.
    pub fn assemble(config: AgentConfig, actor: Mlp, critic: Critic) -> Self {
        let actor_groups: Vec<usize> = actor.params().iter().map(|p| p.len()).collect();
        let actor_opt = Adam::new(&actor_groups, config.actor_lr);
        let critic_opt = Adam::new(&critic.group_sizes(), config.critic_lr);
        Self {
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            actor_opt,
            critic_opt,
            config,
        }
    }

    /// Policy output plus N(0, sigma) noise, clipped to [-1, 1].
    pub fn act<R: Rng>(&self, obs: &[f64], sigma: f64, rng: &mut R) -> Result<Vec<f64>> {
        let mut a = self.actor.forward(obs)?;
        if sigma > 0.0 {
            let noise = Normal::new(0.0, sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            for x in a.iter_mut() {
                *x += noise.sample(rng);
            }
        }
        for x in a.iter_mut() {
            *x = x.clamp(-1.0, 1.0);
        }
        Ok(a)
    }

    pub fn q_value(&self, obs: &[f64], act: &[f64]) -> Result<f64> {
        self.critic.q(obs, act)
    }

    /// One critic regression step toward `r + gamma (1 - done) Q'(s', mu'(s'))`,
    /// one actor ascent step on `Q(s, mu(s))`, then soft target updates.
    pub fn update(&mut self, batch: &[&Transition]) -> Result<UpdateStats> {
        if batch.is_empty() {
            return Err(Error::EmptyInput);
        }
        let (od, ad) = (self.config.obs_dim, self.config.act_dim);
        let n = batch.len() as f64;
        let obs = rows(batch, od, |t| &t.obs)?;
        let next = rows(batch, od, |t| &t.next_obs)?;
        let act = rows(batch, ad, |t| &t.action)?;

        let targets = self.targets(batch, &next)?;

        let cache = self.critic.forward_batch(&obs, &act)?;
        let err = cache.q().column(0).to_owned() - &targets;
        let critic_loss = err.mapv(|e| e * e).sum() / n;
        let up = (err * (2.0 / n)).insert_axis(Axis(1));
        let (g_head, d_joined) = self.critic.head.backward_batch(&cache.head, &up)?;
        let h1 = self.config.critic_hidden.0;
        let d_trunk = d_joined.slice(s![.., ..h1]).to_owned();
        let (g_trunk, _) = self.critic.trunk.backward_batch(&cache.trunk, &d_trunk)?;
        let grads: Vec<&[f64]> = g_trunk.slices().into_iter().chain(g_head.slices()).collect();
        self.critic_opt.step(&mut self.critic.params_mut(), &grads)?;

        let a_cache = self.actor.forward_batch(&obs)?;
        let pi = a_cache.output().clone();
        let q_cache = self.critic.forward_batch(&obs, &pi)?;
        let actor_objective = q_cache.q().sum() / n;
        let up = Array2::from_elem((batch.len(), 1), -1.0 / n);
        let (_, d_joined) = self.critic.head.backward_batch(&q_cache.head, &up)?;
        let d_action = d_joined.slice(s![.., h1..]).to_owned();
        let (g_actor, _) = self.actor.backward_batch(&a_cache, &d_action)?;
        self.actor_opt.step(&mut self.actor.params_mut(), &g_actor.slices())?;

        let tau = self.config.tau;
        self.actor_target.soft_update_from(&self.actor, tau);
        self.critic_target.soft_update_from(&self.critic, tau);
        Ok(UpdateStats { critic_loss, actor_objective })
    }

    /// Bootstrapped regression targets for a batch.
    pub fn targets(&self, batch: &[&Transition], next: &Array2<f64>) -> Result<ndarray::Array1<f64>> {
        let next_act = self.actor_target.forward_batch(next)?.output().clone();
        let q_next = self.critic_target.forward_batch(next, &next_act)?;
        let g = self.config.gamma;
        Ok(batch
            .iter()
            .zip(q_next.q().column(0))
            .map(|(t, &q)| if t.done { t.reward } else { t.reward + g * q })
            .collect())
    }
}

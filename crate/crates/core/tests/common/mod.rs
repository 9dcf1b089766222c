#![allow(dead_code)]

use covert_nav::drl::{Activation, Agent, AgentConfig, Mlp, ReplayBuffer, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Worst relative error between backprop and central differences over every
/// parameter and input of one random network.
pub fn gradient_check_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden = rng.random_range(0..=3usize);
    let mut sizes = vec![rng.random_range(1..=8usize)];
    sizes.extend((0..hidden).map(|_| rng.random_range(1..=32usize)));
    sizes.push(rng.random_range(1..=4usize));
    let output = [Activation::Identity, Activation::Tanh, Activation::Relu][rng.random_range(0..3)];
    let mut net = Mlp::new(&sizes, output, None, &mut rng).unwrap();
    let x: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-2.0..2.0)).collect();
    let up: Vec<f64> = (0..*sizes.last().unwrap()).map(|_| rng.random_range(-1.0..1.0)).collect();

    let f = |net: &Mlp, x: &[f64]| -> f64 { net.forward(x).unwrap().iter().zip(&up).map(|(y, u)| y * u).sum() };
    let (grads, dx) = net.backward(&x, &up).unwrap();
    let analytic: Vec<f64> = grads.slices().concat();
    let theta = net.flat_params();
    let h = 1e-6;
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
    let mut worst: f64 = 0.0;
    for k in 0..theta.len() {
        let mut p = theta.clone();
        p[k] = theta[k] + h;
        net.set_flat_params(&p).unwrap();
        let hi = f(&net, &x);
        p[k] = theta[k] - h;
        net.set_flat_params(&p).unwrap();
        let lo = f(&net, &x);
        worst = worst.max(rel(analytic[k], (hi - lo) / (2.0 * h)));
    }
    net.set_flat_params(&theta).unwrap();
    for k in 0..x.len() {
        let mut xp = x.clone();
        xp[k] = x[k] + h;
        let hi = f(&net, &xp);
        xp[k] = x[k] - h;
        let lo = f(&net, &xp);
        worst = worst.max(rel(dx[k], (hi - lo) / (2.0 * h)));
    }
    worst
}

/// Two states visited alternately whatever the action; reward is
/// `base(s) + 0.5 a`.
pub struct ToyMdp {
    pub base: [f64; 2],
    pub slope: f64,
    pub gamma: f64,
}

impl Default for ToyMdp {
    fn default() -> Self {
        Self { base: [1.0, -1.0], slope: 0.5, gamma: 0.5 }
    }
}

impl ToyMdp {
    pub fn obs(s: usize) -> Vec<f64> {
        if s == 0 {
            vec![1.0, 0.0]
        } else {
            vec![0.0, 1.0]
        }
    }

    pub fn reward(&self, s: usize, a: f64) -> f64 {
        self.base[s] + self.slope * a
    }

    /// Q* by value iteration over a 201-point action grid, to 1e-10.
    pub fn q_star(&self) -> impl Fn(usize, f64) -> f64 + '_ {
        let grid: Vec<f64> = (0..=200).map(|i| -1.0 + 0.01 * i as f64).collect();
        let mut v = [0.0f64; 2];
        loop {
            let mut next = [0.0; 2];
            for s in 0..2 {
                next[s] =
                    grid.iter().map(|&a| self.reward(s, a) + self.gamma * v[1 - s]).fold(f64::NEG_INFINITY, f64::max);
            }
            let delta = (next[0] - v[0]).abs().max((next[1] - v[1]).abs());
            v = next;
            if delta < 1e-10 {
                break;
            }
        }
        move |s, a| self.reward(s, a) + self.gamma * v[1 - s]
    }
}

pub struct ToyRun {
    pub worst_error: f64,
    pub losses: Vec<f64>,
}

/// DDPG on the toy MDP from a buffer of uniformly random actions.
pub fn toy_mdp_run(seed: u64, updates: usize) -> ToyRun {
    let mdp = ToyMdp::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = AgentConfig { actor_lr: 1e-3, critic_lr: 1e-2, gamma: mdp.gamma, tau: 0.1, ..AgentConfig::new(2, 1) };
    let mut agent = Agent::new(cfg, &mut rng).unwrap();
    let mut buf = ReplayBuffer::new(1000);
    for k in 0..400 {
        let s = k % 2;
        let a: f64 = rng.random_range(-1.0..=1.0);
        buf.push(Transition {
            obs: ToyMdp::obs(s),
            action: vec![a],
            reward: mdp.reward(s, a),
            next_obs: ToyMdp::obs(1 - s),
            done: false,
        });
    }
    let mut losses = Vec::with_capacity(updates);
    for _ in 0..updates {
        let batch = buf.sample(64, &mut rng).unwrap();
        losses.push(agent.update(&batch).unwrap().critic_loss);
    }
    let q = mdp.q_star();
    let mut worst: f64 = 0.0;
    for s in 0..2 {
        for a in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            worst = worst.max((agent.q_value(&ToyMdp::obs(s), &[a]).unwrap() - q(s, a)).abs());
        }
    }
    ToyRun { worst_error: worst, losses }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

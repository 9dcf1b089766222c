use super::policy::Policy;
use crate::env::{EnvConfig, NavEnv};
use crate::error::Result;
use crate::geom::Point2;
use crate::perception::CoverVerdict;
use crate::reward::RewardBreakdown;
use crate::terrain::Scenario;
use crate::world::{Command, RobotState, StepEvent};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub tick: u64,
    pub state: RobotState,
    /// Command that produced this state; zero for the initial record.
    pub command: Command,
    pub reward: RewardBreakdown,
    pub cover: CoverVerdict,
    pub event: StepEvent,
}

/// Full trace of one episode. `records[0]` is the spawn state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub scenario_id: String,
    pub policy: String,
    pub seed: u64,
    pub goal: Point2,
    pub records: Vec<StepRecord>,
    pub terminal: StepEvent,
    pub wall_clock_s: f64,
    pub sim_time_s: f64,
}

impl EpisodeLog {
    /// Copy with the wall-clock duration zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        Self { wall_clock_s: 0.0, ..self.clone() }
    }

    /// Records after the spawn state.
    pub fn steps(&self) -> &[StepRecord] {
        self.records.get(1..).unwrap_or(&[])
    }
}

/// Explicit start pose and goal, bypassing the scenario's samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedStart {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub goal: Point2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub measure_time: bool,
    pub fixed_start: Option<FixedStart>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { env: EnvConfig::default(), measure_time: true, fixed_start: None }
    }
}

/// Spawns, samples a goal and drives `policy` until the goal, a collision
/// or the step limit. Everything but the wall-clock field is a function of
/// `seed`.
pub fn run_episode(
    policy: &Policy,
    scenario: &Scenario,
    scenario_id: &str,
    cfg: &RunConfig,
    seed: u64,
) -> Result<EpisodeLog> {
    let started = Instant::now();
    let mut env = NavEnv::new(scenario, cfg.env.clone(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05ee_d0fa_11ce);
    match cfg.fixed_start {
        Some(f) => env.reset_to(f.x, f.y, f.heading, f.goal)?,
        None => env.reset()?,
    };
    let mut records = Vec::with_capacity(cfg.env.max_steps + 1);
    records.push(StepRecord {
        tick: 0,
        state: *env.robot(),
        command: Command::STOP,
        reward: RewardBreakdown::default(),
        cover: env.cover().clone(),
        event: StepEvent::None,
    });
    let terminal = loop {
        let cmd = policy.command(&env, &mut rng)?;
        let t = env.step(cmd)?;
        records.push(StepRecord {
            tick: env.steps() as u64,
            state: *env.robot(),
            command: cmd,
            reward: t.reward,
            cover: t.cover,
            event: t.event,
        });
        if t.done {
            break t.event;
        }
    };
    let steps = records.len() - 1;
    Ok(EpisodeLog {
        scenario_id: scenario_id.to_string(),
        policy: policy.name().to_string(),
        seed,
        goal: env.world().goal,
        records,
        terminal,
        wall_clock_s: if cfg.measure_time { started.elapsed().as_secs_f64() } else { 0.0 },
        sim_time_s: steps as f64 * cfg.env.dwa.dt,
    })
}

/// Reached the goal within the step limit without colliding.
pub fn success(log: &EpisodeLog) -> bool {
    log.terminal == StepEvent::GoalReached
}

/// Path length of the planar trace.
pub fn trajectory_length(log: &EpisodeLog) -> f64 {
    log.records.windows(2).map(|w| (w[1].state.x - w[0].state.x).hypot(w[1].state.y - w[0].state.y)).sum()
}

/// Sum of |dz| between consecutive records.
pub fn cumulative_abs_dh(log: &EpisodeLog) -> f64 {
    log.records.windows(2).map(|w| (w[1].state.z - w[0].state.z).abs()).sum()
}

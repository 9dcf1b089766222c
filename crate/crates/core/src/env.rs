//! Navigation environment: one control interval per step, with sensing,
//! the velocity window and the reward computed along the way.

use crate::dwa::{build_observation, build_window, DwaConfig, ObservationMatrix, VelocityWindow};
use crate::error::{Error, Result};
use crate::geom::{Point2, Point3, Rect};
use crate::perception::{detect_cover, sense, CoverVerdict, PerceptionConfig};
use crate::reward::{total_reward, RewardBreakdown, RewardWeights, StepContext};
use crate::terrain::Scenario;
use crate::world::{Command, RobotState, StepEvent, WorldConfig, WorldState};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Goals are drawn within this distance of the spawn point.
pub const GOAL_RADIUS: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub world: WorldConfig,
    pub dwa: DwaConfig,
    pub perception: PerceptionConfig,
    pub reward: RewardWeights,
    pub max_steps: usize,
    pub goal_radius: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            dwa: DwaConfig::default(),
            perception: PerceptionConfig::default(),
            reward: RewardWeights::default(),
            max_steps: 100,
            goal_radius: GOAL_RADIUS,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.dwa.validate()?;
        self.reward.validate()?;
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        if self.goal_radius.is_nan() || self.goal_radius < 0.0 {
            return Err(Error::InvalidConfig("goal_radius must be non-negative".into()));
        }
        self.substeps().map(|_| ())
    }

    /// World steps per control interval.
    pub fn substeps(&self) -> Result<usize> {
        let ratio = self.dwa.dt / self.world.sim_dt;
        let n = ratio.round();
        if !(n >= 1.0 && (ratio - n).abs() < 1e-9) {
            return Err(Error::InvalidConfig(format!(
                "control interval {} is not a multiple of sim_dt {}",
                self.dwa.dt, self.world.sim_dt
            )));
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub command: Command,
    pub event: StepEvent,
    pub reward: RewardBreakdown,
    pub cover: CoverVerdict,
    /// True when the episode is over: goal, collision or step limit.
    pub done: bool,
    /// True when the episode ended by the step limit alone.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct NavEnv {
    pub config: EnvConfig,
    world: WorldState,
    start_zone: Rect,
    goal_zone: Option<Rect>,
    substeps: usize,
    steps: usize,
    window: VelocityWindow,
    history: Vec<VelocityWindow>,
    heights: VecDeque<f64>,
    cover: CoverVerdict,
}

impl NavEnv {
    pub fn new(scenario: &Scenario, config: EnvConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let world = WorldState::from_scenario(scenario, config.world.clone(), seed);
        let window = build_window(&world, &config.dwa);
        let substeps = config.substeps()?;
        Ok(Self {
            config,
            world,
            start_zone: scenario.start_zone,
            goal_zone: scenario.goal_zone,
            substeps,
            steps: 0,
            window,
            history: Vec::new(),
            heights: VecDeque::new(),
            cover: CoverVerdict::none(),
        })
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn robot(&self) -> &RobotState {
        &self.world.robot
    }

    pub fn window(&self) -> &VelocityWindow {
        &self.window
    }

    pub fn cover(&self) -> &CoverVerdict {
        &self.cover
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn goal_distance(&self) -> f64 {
        self.world.robot.position().distance(&self.world.goal)
    }

    /// New spawn and goal drawn from the environment's own rng stream.
    pub fn reset(&mut self) -> Result<ObservationMatrix> {
        self.world.tick = 0;
        self.world.spawn_robot(self.start_zone)?;
        match self.goal_zone {
            Some(zone) => self.world.sample_goal_in(zone, self.config.goal_radius)?,
            None => self.world.sample_goal(self.config.goal_radius)?,
        };
        self.steps = 0;
        self.history.clear();
        self.heights.clear();
        self.refresh();
        Ok(self.observe())
    }

    /// Reset to a given pose and goal instead of sampling them.
    pub fn reset_to(&mut self, x: f64, y: f64, heading: f64, goal: Point2) -> Result<ObservationMatrix> {
        let robot = self.world.robot_at(x, y, heading)?;
        if self.world.collision_check(robot.position(), self.config.world.robot_radius) {
            return Err(Error::InvalidZone(format!("start ({x}, {y}) is not free")));
        }
        self.world.tick = 0;
        self.world.robot = robot;
        self.world.goal = goal;
        self.steps = 0;
        self.history.clear();
        self.heights.clear();
        self.refresh();
        Ok(self.observe())
    }

    fn sense_cover(&self) -> CoverVerdict {
        let dets = sense(&self.world, &self.config.perception);
        detect_cover(&dets, Point3::new(0.0, 0.0, 0.0))
    }

    fn refresh(&mut self) {
        self.cover = self.sense_cover();
        self.window = build_window(&self.world, &self.config.dwa);
        self.history.push(self.window.clone());
        let keep = self.config.dwa.n_obs;
        if self.history.len() > keep {
            self.history.drain(..self.history.len() - keep);
        }
    }

    pub fn observe(&self) -> ObservationMatrix {
        build_observation(&self.history, &self.world.robot, self.world.goal, &self.cover, &self.config.dwa)
    }

    /// Holds `cmd` for one control interval. The command is applied as given;
    /// callers are expected to pick it from [`window`](Self::window).
    pub fn step(&mut self, cmd: Command) -> Result<Transition> {
        let prev = self.world.robot;
        let d_prev = self.goal_distance();
        let mut event = StepEvent::None;
        for _ in 0..self.substeps {
            let (next, ev) = self.world.step(cmd, self.config.world.sim_dt)?;
            self.world = next;
            event = ev;
            if ev != StepEvent::None {
                break;
            }
        }
        self.steps += 1;

        self.heights.push_front(prev.z);
        self.heights.truncate(self.config.reward.n_history);
        self.refresh();
        let robot = self.world.robot;
        let ctx = StepContext {
            d_prev,
            d_cur: self.goal_distance(),
            theta_prev: prev.heading,
            theta_cur: robot.heading,
            roll: robot.roll,
            pitch: robot.pitch,
            elevation_history: self.heights.iter().copied().collect(),
            h_cur: robot.z,
            d_cover: self.cover.cover_distance,
        };
        let reward = total_reward(&ctx, &self.config.reward)?;
        let limit = self.steps >= self.config.max_steps;
        Ok(Transition {
            command: cmd,
            event,
            reward,
            cover: self.cover.clone(),
            done: event != StepEvent::None || limit,
            truncated: event == StepEvent::None && limit,
        })
    }
}

//! Dynamic-window velocity search: the reachable (v, omega) grid, rollout
//! admissibility, the classic DWA selector and the observation vector built
//! from recent windows.

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Point2};
use crate::perception::{CoverVerdict, COVER_DISTANCE_MAX};
use crate::world::{advance_pose, Command, RobotState, WorldState};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Goal distances are scaled by this in observations.
pub const GOAL_DISTANCE_SCALE: f64 = 12.0;

/// Number of scalar features appended after the window history.
pub const OBS_SCALARS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicLimits {
    pub v_min: f64,
    pub v_max: f64,
    pub omega_max: f64,
    pub accel_v: f64,
    pub accel_omega: f64,
}

impl Default for DynamicLimits {
    fn default() -> Self {
        Self { v_min: 0.0, v_max: 1.5, omega_max: 1.5, accel_v: 2.0, accel_omega: 4.0 }
    }
}

impl DynamicLimits {
    pub fn validate(&self) -> Result<()> {
        let finite =
            [self.v_min, self.v_max, self.omega_max, self.accel_v, self.accel_omega].iter().all(|x| x.is_finite());
        if !finite || self.v_max < self.v_min || self.omega_max < 0.0 {
            return Err(Error::InvalidConfig(format!("bad velocity limits {self:?}")));
        }
        if !(self.accel_v > 0.0 && self.accel_omega > 0.0) {
            return Err(Error::InvalidConfig("accelerations must be positive".into()));
        }
        Ok(())
    }

    /// True when `cmd` is reachable from `(v_now, omega_now)` in one interval
    /// and inside the absolute limits.
    pub fn permits(&self, v_now: f64, omega_now: f64, cmd: Command, dt: f64) -> bool {
        (cmd.v - v_now).abs() <= self.accel_v * dt
            && (cmd.omega - omega_now).abs() <= self.accel_omega * dt
            && cmd.v >= self.v_min
            && cmd.v <= self.v_max
            && cmd.omega.abs() <= self.omega_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwaConfig {
    pub limits: DynamicLimits,
    /// Control interval the window is computed for.
    pub dt: f64,
    pub nv: usize,
    pub nw: usize,
    pub horizon: f64,
    /// Rollout integration step; matches the world's step.
    pub rollout_dt: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma_w: f64,
    /// Windows kept in the observation.
    pub n_obs: usize,
}

impl Default for DwaConfig {
    fn default() -> Self {
        Self {
            limits: DynamicLimits::default(),
            dt: 0.2,
            nv: 7,
            nw: 7,
            horizon: 1.0,
            rollout_dt: 0.1,
            alpha: 1.0,
            beta: 0.5,
            gamma_w: 0.2,
            n_obs: 4,
        }
    }
}

impl DwaConfig {
    pub fn validate(&self) -> Result<()> {
        self.limits.validate()?;
        if self.nv < 2 || self.nw < 2 {
            return Err(Error::InvalidConfig("window needs at least 2x2 candidates".into()));
        }
        if !(self.dt > 0.0 && self.rollout_dt > 0.0 && self.horizon >= self.rollout_dt) {
            return Err(Error::InvalidConfig("need dt > 0 and horizon >= rollout_dt".into()));
        }
        if self.n_obs == 0 {
            return Err(Error::InvalidConfig("n_obs must be positive".into()));
        }
        Ok(())
    }

    pub fn observation_len(&self) -> usize {
        self.n_obs * 2 * self.nv * self.nw + OBS_SCALARS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub v: f64,
    pub omega: f64,
    pub admissible: bool,
    /// DWA objective; infinite for inadmissible candidates.
    pub cost: f64,
}

impl Candidate {
    pub fn command(&self) -> Command {
        Command::new(self.v, self.omega)
    }
}

/// `nv x nw` grid, row-major in v (index `i * nw + j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityWindow {
    pub v_range: (f64, f64),
    pub omega_range: (f64, f64),
    pub nv: usize,
    pub nw: usize,
    pub candidates: Vec<Candidate>,
}

impl VelocityWindow {
    pub fn any_admissible(&self) -> bool {
        self.candidates.iter().any(|c| c.admissible)
    }

    pub fn get(&self, i: usize, j: usize) -> &Candidate {
        &self.candidates[i * self.nw + j]
    }

    /// The candidate closest to stopping: least |v|, then least |omega|.
    pub fn braking_candidate(&self) -> &Candidate {
        self.candidates
            .iter()
            .min_by(|a, b| a.v.abs().total_cmp(&b.v.abs()).then(a.omega.abs().total_cmp(&b.omega.abs())))
            .expect("window is never empty")
    }
}

/// `[lo, hi]` reachable from `now`, tightened by one ulp where rounding
/// would otherwise let `|x - now|` exceed `step`.
fn reachable_range(now: f64, step: f64, min: f64, max: f64) -> (f64, f64) {
    let now = now.clamp(min, max);
    let mut lo = now - step;
    while now - lo > step {
        lo = lo.next_up();
    }
    let mut hi = now + step;
    while hi - now > step {
        hi = hi.next_down();
    }
    (lo.max(min), hi.min(max))
}

fn grid_value(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    let t = k as f64 / (n - 1) as f64;
    ((1.0 - t) * lo + t * hi).clamp(lo, hi)
}

/// Uniform grid over the velocities reachable within `dt`, all flagged
/// inadmissible with infinite cost until [`build_window`] scores them.
pub fn dynamic_window(state: &RobotState, limits: &DynamicLimits, dt: f64, nv: usize, nw: usize) -> VelocityWindow {
    let nv = nv.max(2);
    let nw = nw.max(2);
    let (v_lo, v_hi) = reachable_range(state.v, limits.accel_v * dt, limits.v_min, limits.v_max);
    let (w_lo, w_hi) = reachable_range(state.omega, limits.accel_omega * dt, -limits.omega_max, limits.omega_max);
    let mut candidates = Vec::with_capacity(nv * nw);
    for i in 0..nv {
        let v = grid_value(v_lo, v_hi, i, nv);
        for j in 0..nw {
            let omega = grid_value(w_lo, w_hi, j, nw);
            candidates.push(Candidate { v, omega, admissible: false, cost: f64::INFINITY });
        }
    }
    VelocityWindow { v_range: (v_lo, v_hi), omega_range: (w_lo, w_hi), nv, nw, candidates }
}

struct Rollout {
    collided: bool,
    end: (f64, f64, f64),
    min_clearance: f64,
}

fn rollout(world: &WorldState, state: &RobotState, cmd: Command, horizon: f64, dt: f64) -> Rollout {
    let steps = ((horizon / dt) - 1e-9).ceil().max(1.0) as usize;
    let r = world.config.robot_radius;
    let (mut x, mut y, mut h) = (state.x, state.y, state.heading);
    let mut min_clearance = f64::INFINITY;
    for _ in 0..steps {
        (x, y, h) = advance_pose(x, y, h, cmd, dt);
        let p = Point2::new(x, y);
        if world.collision_check(p, r) {
            return Rollout { collided: true, end: (x, y, h), min_clearance: 0.0 };
        }
        min_clearance = min_clearance.min(world.clearance(p));
    }
    Rollout { collided: false, end: (x, y, h), min_clearance }
}

/// Whether holding `cand` for `horizon` seconds, integrated in `dt` steps
/// exactly as the world integrates, stays collision-free.
pub fn admissible(world: &WorldState, state: &RobotState, cand: Command, horizon: f64, dt: f64) -> bool {
    !rollout(world, state, cand, horizon, dt).collided
}

fn objective_terms(cfg: &DwaConfig, ro: &Rollout, goal: Point2, v: f64) -> f64 {
    let (x, y, h) = ro.end;
    let heading_error = wrap_angle((goal.y - y).atan2(goal.x - x) - h).abs();
    let clearance_term = if ro.min_clearance.is_infinite() { 0.0 } else { 1.0 / ro.min_clearance };
    cfg.alpha * heading_error + cfg.beta * clearance_term + cfg.gamma_w * (cfg.limits.v_max - v)
}

/// Classic DWA cost: heading error to the goal at the end of the rollout,
/// inverse clearance along it, and the speed shortfall. Lower is better.
pub fn dwa_objective(
    world: &WorldState,
    state: &RobotState,
    cand: Command,
    goal: Point2,
    cfg: &DwaConfig,
) -> Result<f64> {
    let ro = rollout(world, state, cand, cfg.horizon, cfg.rollout_dt);
    if ro.collided {
        return Err(Error::InadmissibleCandidate { v: cand.v, omega: cand.omega });
    }
    Ok(objective_terms(cfg, &ro, goal, cand.v))
}

/// Dynamic window for the robot's current state with every candidate rolled
/// out, flagged and scored against the world's goal.
pub fn build_window(world: &WorldState, cfg: &DwaConfig) -> VelocityWindow {
    let state = &world.robot;
    let mut window = dynamic_window(state, &cfg.limits, cfg.dt, cfg.nv, cfg.nw);
    for c in window.candidates.iter_mut() {
        let ro = rollout(world, state, c.command(), cfg.horizon, cfg.rollout_dt);
        c.admissible = !ro.collided;
        c.cost = if c.admissible { objective_terms(cfg, &ro, world.goal, c.v) } else { f64::INFINITY };
    }
    window
}

fn dwa_order(a: &Candidate, b: &Candidate) -> Ordering {
    a.cost.total_cmp(&b.cost).then(a.omega.abs().total_cmp(&b.omega.abs())).then(a.v.total_cmp(&b.v))
}

/// Best admissible candidate of a scored window.
pub fn select_from_window(window: &VelocityWindow) -> Result<Command> {
    window
        .candidates
        .iter()
        .filter(|c| c.admissible)
        .min_by(|a, b| dwa_order(a, b))
        .map(Candidate::command)
        .ok_or(Error::NoAdmissibleVelocity)
}

/// Classic DWA: the admissible candidate with the lowest objective, ties to
/// lower |omega| and then lower v.
pub fn select_velocity_dwa(world: &WorldState, goal: Point2, cfg: &DwaConfig) -> Result<Command> {
    let mut w = world.clone();
    w.goal = goal;
    select_from_window(&build_window(&w, cfg))
}

/// Fixed-length observation: per window (oldest first) the 0/1 admissibility
/// flags then min-max scaled costs, followed by goal, attitude, cover and
/// velocity scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationMatrix {
    pub values: Vec<f64>,
}

impl ObservationMatrix {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

fn encode_window(w: Option<&VelocityWindow>, n: usize, out: &mut Vec<f64>) {
    let Some(w) = w.filter(|w| w.candidates.len() == n) else {
        out.extend(std::iter::repeat_n(0.0, n));
        out.extend(std::iter::repeat_n(1.0, n));
        return;
    };
    out.extend(w.candidates.iter().map(|c| if c.admissible { 1.0 } else { 0.0 }));
    let (lo, hi) = w
        .candidates
        .iter()
        .filter(|c| c.admissible)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c.cost), hi.max(c.cost)));
    let span = hi - lo;
    out.extend(w.candidates.iter().map(|c| {
        if !c.admissible {
            1.0
        } else if span > 0.0 {
            ((c.cost - lo) / span).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }));
}

/// `history` is oldest first; only the last `n_obs` entries are used and a
/// short history is padded in front with copies of its oldest entry.
pub fn build_observation(
    history: &[VelocityWindow],
    state: &RobotState,
    goal: Point2,
    cover: &CoverVerdict,
    cfg: &DwaConfig,
) -> ObservationMatrix {
    let n = cfg.nv * cfg.nw;
    let mut values = Vec::with_capacity(cfg.observation_len());
    let recent = &history[history.len().saturating_sub(cfg.n_obs)..];
    let pad = cfg.n_obs - recent.len();
    for _ in 0..pad {
        encode_window(recent.first(), n, &mut values);
    }
    for w in recent {
        encode_window(Some(w), n, &mut values);
    }

    let (dx, dy) = (goal.x - state.x, goal.y - state.y);
    let goal_bearing = wrap_angle(dy.atan2(dx) - state.heading);
    let cover_dist =
        if cover.cover_distance.is_finite() { (cover.cover_distance / COVER_DISTANCE_MAX).min(1.0) } else { 1.0 };
    let (cover_sin, cover_cos) = cover.nearest_bearing().map_or((0.0, 0.0), f64::sin_cos);
    let lim = &cfg.limits;
    values.extend([
        dx.hypot(dy) / GOAL_DISTANCE_SCALE,
        goal_bearing.sin(),
        goal_bearing.cos(),
        state.roll,
        state.pitch,
        cover_dist,
        cover_sin,
        cover_cos,
        if lim.v_max > 0.0 { state.v / lim.v_max } else { 0.0 },
        if lim.omega_max > 0.0 { state.omega / lim.omega_max } else { 0.0 },
    ]);
    ObservationMatrix { values }
}

/// Affine map of `raw` in [-1, 1]^2 onto the window bounds, snapped to the
/// nearest admissible candidate in normalized (v, omega) space. With nothing
/// admissible the window's braking candidate is returned, which is (0, 0)
/// whenever the robot can stop within one interval.
pub fn project_to_feasible(raw: [f64; 2], window: &VelocityWindow) -> Command {
    let a = raw.map(|x| if x.is_nan() { 0.0 } else { x.clamp(-1.0, 1.0) });
    let (v_lo, v_hi) = window.v_range;
    let (w_lo, w_hi) = window.omega_range;
    let v_target = v_lo + 0.5 * (a[0] + 1.0) * (v_hi - v_lo);
    let w_target = w_lo + 0.5 * (a[1] + 1.0) * (w_hi - w_lo);
    let v_span = if v_hi > v_lo { v_hi - v_lo } else { 1.0 };
    let w_span = if w_hi > w_lo { w_hi - w_lo } else { 1.0 };
    let dist = |c: &Candidate| {
        let dv = (c.v - v_target) / v_span;
        let dw = (c.omega - w_target) / w_span;
        dv * dv + dw * dw
    };
    window
        .candidates
        .iter()
        .filter(|c| c.admissible)
        .min_by(|x, y| dist(x).total_cmp(&dist(y)))
        .unwrap_or_else(|| window.braking_candidate())
        .command()
}

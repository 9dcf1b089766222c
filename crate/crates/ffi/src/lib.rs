//! C ABI over covert-nav.
//!
//! Every entry point returns a [`CnStatus`]. On failure a message is kept per
//! thread and can be read with [`cn_last_error`]. Handles are opaque and must
//! be released with the matching `_free` function.

#![allow(clippy::missing_safety_doc)]

use covert_nav::drl::Checkpoint;
use covert_nav::dwa::select_from_window;
use covert_nav::env::{EnvConfig, NavEnv};
use covert_nav::geom::{Point2, Point3};
use covert_nav::harness::{io, Policy};
use covert_nav::perception::{detect_cover, Detection};
use covert_nav::reward::{total_reward, RewardBreakdown, RewardWeights, StepContext};
use covert_nav::terrain::{
    cover_corridor_scenario, generate_scenario, CorridorLayout, Scenario, ScenarioKind, ScenarioSpec,
};
use covert_nav::world::{Command, RobotState, StepEvent};
use covert_nav::Error;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    OutOfBounds = 4,
    InvalidScenario = 5,
    InvalidConfig = 6,
    Infeasible = 7,
    Io = 8,
    Panic = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnEvent {
    None = 0,
    Collision = 1,
    GoalReached = 2,
}

impl From<StepEvent> for CnEvent {
    fn from(e: StepEvent) -> Self {
        match e {
            StepEvent::None => CnEvent::None,
            StepEvent::Collision => CnEvent::Collision,
            StepEvent::GoalReached => CnEvent::GoalReached,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CnReward {
    pub r_goal: f64,
    pub r_dir: f64,
    pub r_stab: f64,
    pub r_elev: f64,
    pub r_cover: f64,
    pub total: f64,
}

impl From<RewardBreakdown> for CnReward {
    fn from(r: RewardBreakdown) -> Self {
        Self {
            r_goal: r.r_goal,
            r_dir: r.r_dir,
            r_stab: r.r_stab,
            r_elev: r.r_elev,
            r_cover: r.r_cover,
            total: r.total,
        }
    }
}

/// Inputs for one reward evaluation. `elevation_history` points to
/// `history_len` heights, most recent first. Use `INFINITY` for `d_cover`
/// when no cover is known.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CnStepContext {
    pub d_prev: f64,
    pub d_cur: f64,
    pub theta_prev: f64,
    pub theta_cur: f64,
    pub roll: f64,
    pub pitch: f64,
    pub elevation_history: *const f64,
    pub history_len: usize,
    pub h_cur: f64,
    pub d_cover: f64,
}

/// One object detection. `class_name` is a NUL-terminated label such as "Tree".
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CnDetection {
    pub class_name: *const c_char,
    pub confidence: f64,
    pub object_id: i64,
    pub x_pos: f64,
    pub y_pos: f64,
    pub z_pos: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CnCoverVerdict {
    pub is_cover: bool,
    /// `INFINITY` when no object qualifies.
    pub cover_distance: f64,
    pub has_nearest: bool,
    pub nearest_object_id: i64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CnRobotState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub heading: f64,
    pub v: f64,
    pub omega: f64,
    pub roll: f64,
    pub pitch: f64,
}

impl From<RobotState> for CnRobotState {
    fn from(r: RobotState) -> Self {
        Self { x: r.x, y: r.y, z: r.z, heading: r.heading, v: r.v, omega: r.omega, roll: r.roll, pitch: r.pitch }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CnCommand {
    pub v: f64,
    pub omega: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CnStepResult {
    pub event: CnEvent,
    pub done: bool,
    pub truncated: bool,
    pub reward: CnReward,
    pub is_cover: bool,
    pub cover_distance: f64,
}

pub struct CnScenario(Scenario);

pub struct CnEnv(NavEnv);

pub struct CnPolicy {
    policy: Policy,
    rng: ChaCha8Rng,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CnStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::OutOfBounds { .. } => CnStatus::OutOfBounds,
            Error::InvalidGrid(_) | Error::InvalidSpec(_) | Error::InvalidZone(_) | Error::NoValidGoal { .. } => {
                CnStatus::InvalidScenario
            }
            Error::InvalidConfig(_) | Error::DegenerateNormalizer(_) => CnStatus::InvalidConfig,
            Error::InadmissibleCandidate { .. } | Error::NoAdmissibleVelocity | Error::InfeasibleCommand { .. } => {
                CnStatus::Infeasible
            }
            Error::DimensionMismatch { .. } | Error::EmptyHistory | Error::EmptyInput => CnStatus::InvalidArgument,
            Error::InsufficientSamples { .. } => CnStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: CnStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CnStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside covert-nav".into());
            CnStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(CnStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(CnStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(CnStatus::NullPointer, format!("{what} is null")))
}

unsafe fn in_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(CnStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CnStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Length of the observation vector produced by environments with default settings.
#[no_mangle]
pub extern "C" fn cn_observation_len() -> usize {
    EnvConfig::default().dwa.observation_len()
}

/// Reward terms for one step under the default weights.
#[no_mangle]
pub unsafe extern "C" fn cn_reward(ctx: *const CnStepContext, out: *mut CnReward) -> CnStatus {
    guard(|| {
        let c = in_arg(ctx, "ctx")?;
        let out = out_arg(out, "out")?;
        let history = slice_arg(c.elevation_history, c.history_len, "elevation_history")?;
        let ctx = StepContext {
            d_prev: c.d_prev,
            d_cur: c.d_cur,
            theta_prev: c.theta_prev,
            theta_cur: c.theta_cur,
            roll: c.roll,
            pitch: c.pitch,
            elevation_history: history.to_vec(),
            h_cur: c.h_cur,
            d_cover: c.d_cover,
        };
        *out = total_reward(&ctx, &RewardWeights::default())?.into();
        Ok(())
    })
}

/// Nearest qualifying cover among `n` detections, measured from `(rx, ry, rz)`.
#[no_mangle]
pub unsafe extern "C" fn cn_detect_cover(
    detections: *const CnDetection,
    n: usize,
    rx: f64,
    ry: f64,
    rz: f64,
    out: *mut CnCoverVerdict,
) -> CnStatus {
    guard(|| {
        let raw = slice_arg(detections, n, "detections")?;
        let out = out_arg(out, "out")?;
        let dets = raw
            .iter()
            .map(|d| {
                Ok(Detection {
                    class_id: 0,
                    class_name: str_arg(d.class_name, "class_name")?.to_string(),
                    confidence: d.confidence,
                    x_min: 0.0,
                    y_min: 0.0,
                    x_max: 0.0,
                    y_max: 0.0,
                    object_id: d.object_id,
                    x_pos: d.x_pos,
                    y_pos: d.y_pos,
                    z_pos: d.z_pos,
                    kpts: Vec::new(),
                })
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        let v = detect_cover(&dets, Point3::new(rx, ry, rz));
        *out = CnCoverVerdict {
            is_cover: v.is_cover,
            cover_distance: v.cover_distance,
            has_nearest: v.nearest_object_id.is_some(),
            nearest_object_id: v.nearest_object_id.unwrap_or(-1),
        };
        Ok(())
    })
}

/// Generates a scenario. `kind` is one of "normal", "low", "low-high",
/// "forest" or "corridor".
#[no_mangle]
pub unsafe extern "C" fn cn_scenario_generate(kind: *const c_char, seed: u64, out: *mut *mut CnScenario) -> CnStatus {
    guard(|| {
        let kind = str_arg(kind, "kind")?;
        let out = out_arg(out, "out")?;
        let s = if kind.eq_ignore_ascii_case("corridor") {
            cover_corridor_scenario(seed, &CorridorLayout::default())?
        } else {
            let k: ScenarioKind = kind.parse().map_err(|e: Error| fail(CnStatus::InvalidArgument, e.to_string()))?;
            generate_scenario(&ScenarioSpec::new(k, seed))?
        };
        *out = Box::into_raw(Box::new(CnScenario(s)));
        Ok(())
    })
}

/// Loads a scenario JSON file.
#[no_mangle]
pub unsafe extern "C" fn cn_scenario_load(path: *const c_char, out: *mut *mut CnScenario) -> CnStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let s = io::load_scenario(Path::new(path)).map_err(|e| fail(CnStatus::Io, format!("{e:#}")))?;
        *out = Box::into_raw(Box::new(CnScenario(s)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cn_scenario_save(scenario: *const CnScenario, path: *const c_char) -> CnStatus {
    guard(|| {
        let s = in_arg(scenario, "scenario")?;
        let path = str_arg(path, "path")?;
        io::save_scenario(&s.0, Path::new(path)).map_err(|e| fail(CnStatus::Io, format!("{e:#}")))
    })
}

#[no_mangle]
pub unsafe extern "C" fn cn_scenario_object_count(scenario: *const CnScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.objects.len())
}

/// Terrain height at `(x, y)`.
#[no_mangle]
pub unsafe extern "C" fn cn_scenario_height(scenario: *const CnScenario, x: f64, y: f64, out: *mut f64) -> CnStatus {
    guard(|| {
        let s = in_arg(scenario, "scenario")?;
        *out_arg(out, "out")? = s.0.grid.elevation_at(x, y)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cn_scenario_free(scenario: *mut CnScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Creates an environment with default settings. The scenario is copied and
/// may be freed afterwards.
#[no_mangle]
pub unsafe extern "C" fn cn_env_new(scenario: *const CnScenario, seed: u64, out: *mut *mut CnEnv) -> CnStatus {
    guard(|| {
        let s = in_arg(scenario, "scenario")?;
        let out = out_arg(out, "out")?;
        let env = NavEnv::new(&s.0, EnvConfig::default(), seed)?;
        *out = Box::into_raw(Box::new(CnEnv(env)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cn_env_free(env: *mut CnEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

unsafe fn write_obs(env: &NavEnv, buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Ok(());
    }
    let obs = env.observe();
    if len < obs.len() {
        return Err(fail(
            CnStatus::BufferTooSmall,
            format!("observation needs {} values, buffer holds {len}", obs.len()),
        ));
    }
    std::slice::from_raw_parts_mut(buf, obs.len()).copy_from_slice(obs.as_slice());
    Ok(())
}

/// Starts a new episode with a random spawn and goal. When `obs` is not NULL
/// the first observation is written to it.
#[no_mangle]
pub unsafe extern "C" fn cn_env_reset(env: *mut CnEnv, obs: *mut f64, obs_len: usize) -> CnStatus {
    guard(|| {
        let env = out_arg(env, "env")?;
        env.0.reset()?;
        write_obs(&env.0, obs, obs_len)
    })
}

/// Starts a new episode from a fixed pose and goal.
#[no_mangle]
pub unsafe extern "C" fn cn_env_reset_to(
    env: *mut CnEnv,
    x: f64,
    y: f64,
    heading: f64,
    goal_x: f64,
    goal_y: f64,
    obs: *mut f64,
    obs_len: usize,
) -> CnStatus {
    guard(|| {
        let env = out_arg(env, "env")?;
        env.0.reset_to(x, y, heading, Point2::new(goal_x, goal_y))?;
        write_obs(&env.0, obs, obs_len)
    })
}

/// Applies `(v, omega)` for one control interval.
#[no_mangle]
pub unsafe extern "C" fn cn_env_step(
    env: *mut CnEnv,
    v: f64,
    omega: f64,
    out: *mut CnStepResult,
    obs: *mut f64,
    obs_len: usize,
) -> CnStatus {
    guard(|| {
        let env = out_arg(env, "env")?;
        let out = out_arg(out, "out")?;
        let t = env.0.step(Command::new(v, omega))?;
        *out = CnStepResult {
            event: t.event.into(),
            done: t.done,
            truncated: t.truncated,
            reward: t.reward.into(),
            is_cover: t.cover.is_cover,
            cover_distance: t.cover.cover_distance,
        };
        write_obs(&env.0, obs, obs_len)
    })
}

#[no_mangle]
pub unsafe extern "C" fn cn_env_robot(env: *const CnEnv, out: *mut CnRobotState) -> CnStatus {
    guard(|| {
        let env = in_arg(env, "env")?;
        *out_arg(out, "out")? = (*env.0.robot()).into();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cn_env_goal(env: *const CnEnv, x: *mut f64, y: *mut f64) -> CnStatus {
    guard(|| {
        let env = in_arg(env, "env")?;
        let g = env.0.world().goal;
        *out_arg(x, "x")? = g.x;
        *out_arg(y, "y")? = g.y;
        Ok(())
    })
}

/// Best admissible command from the current dynamic window.
#[no_mangle]
pub unsafe extern "C" fn cn_env_dwa_command(env: *const CnEnv, out: *mut CnCommand) -> CnStatus {
    guard(|| {
        let env = in_arg(env, "env")?;
        let c = select_from_window(env.0.window())?;
        *out_arg(out, "out")? = CnCommand { v: c.v, omega: c.omega };
        Ok(())
    })
}

/// Creates a policy: "dwa", "random", "stand-still", "straight", or a path to
/// a checkpoint file. `seed` drives the policy's own randomness.
#[no_mangle]
pub unsafe extern "C" fn cn_policy_new(name: *const c_char, seed: u64, out: *mut *mut CnPolicy) -> CnStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let out = out_arg(out, "out")?;
        let policy = match name {
            "dwa" => Policy::Dwa,
            "random" => Policy::Random,
            "stand-still" => Policy::StandStill,
            "straight" => Policy::StraightToGoal,
            path => {
                let ckpt = Checkpoint::load(Path::new(path)).map_err(|e| fail(CnStatus::Io, format!("{e:#}")))?;
                Policy::from_checkpoint(&ckpt)?
            }
        };
        *out = Box::into_raw(Box::new(CnPolicy { policy, rng: ChaCha8Rng::seed_from_u64(seed) }));
        Ok(())
    })
}

/// Command the policy chooses for the environment's current state.
#[no_mangle]
pub unsafe extern "C" fn cn_policy_command(policy: *mut CnPolicy, env: *const CnEnv, out: *mut CnCommand) -> CnStatus {
    guard(|| {
        let p = out_arg(policy, "policy")?;
        let env = in_arg(env, "env")?;
        let c = p.policy.command(&env.0, &mut p.rng)?;
        *out_arg(out, "out")? = CnCommand { v: c.v, omega: c.omega };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cn_policy_free(policy: *mut CnPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

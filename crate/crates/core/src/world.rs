//! World state, unicycle kinematics, collision geometry and occlusion.
//!
//! A [`WorldState`] is a value: [`WorldState::step`] returns a successor and
//! leaves the receiver untouched. Objects are vertical cylinders standing on
//! the terrain.

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Point2, Point3, Rect};
use crate::terrain::{ElevationGrid, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectClass {
    Tree,
    Bush,
    Rock,
    Cottage,
    Building,
    House,
    DisabledVehicle,
    Other,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 8] = [
        ObjectClass::Rock,
        ObjectClass::Tree,
        ObjectClass::Bush,
        ObjectClass::Cottage,
        ObjectClass::Building,
        ObjectClass::House,
        ObjectClass::DisabledVehicle,
        ObjectClass::Other,
    ];

    /// Whether objects of this class can conceal the robot.
    pub fn is_cover(self) -> bool {
        !matches!(self, ObjectClass::Other)
    }

    /// Integer label emitted in detection records.
    pub fn class_id(self) -> i64 {
        match self {
            ObjectClass::Rock => 0,
            ObjectClass::Tree => 1,
            ObjectClass::Bush => 2,
            ObjectClass::Cottage => 3,
            ObjectClass::Building => 4,
            ObjectClass::House => 5,
            ObjectClass::DisabledVehicle => 6,
            ObjectClass::Other => 7,
        }
    }

    pub fn from_class_id(id: i64) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.class_id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectClass::Tree => "Tree",
            ObjectClass::Bush => "Bush",
            ObjectClass::Rock => "Rock",
            ObjectClass::Cottage => "Cottage",
            ObjectClass::Building => "Building",
            ObjectClass::House => "House",
            ObjectClass::DisabledVehicle => "DisabledVehicle",
            ObjectClass::Other => "Other",
        }
    }

    /// Case-insensitive lookup that also accepts plural and spaced forms
    /// ("rocks", "disabled vehicles"). Unknown labels map to `Other`.
    pub fn from_label(label: &str) -> Self {
        let key: String = label.chars().filter(|c| c.is_ascii_alphanumeric()).map(|c| c.to_ascii_lowercase()).collect();
        match key.as_str() {
            "tree" | "trees" => ObjectClass::Tree,
            "bush" | "bushes" => ObjectClass::Bush,
            "rock" | "rocks" => ObjectClass::Rock,
            "cottage" | "cottages" => ObjectClass::Cottage,
            "building" | "buildings" => ObjectClass::Building,
            "house" | "houses" => ObjectClass::House,
            "disabledvehicle" | "disabledvehicles" | "junkcar" | "junkcars" => ObjectClass::DisabledVehicle,
            _ => ObjectClass::Other,
        }
    }

    pub(crate) fn footprint_range(self) -> (f64, f64) {
        match self {
            ObjectClass::Tree => (0.3, 0.6),
            ObjectClass::Bush => (0.25, 0.6),
            ObjectClass::Rock => (0.3, 1.0),
            ObjectClass::Cottage => (2.0, 3.0),
            ObjectClass::Building => (3.0, 4.5),
            ObjectClass::House => (2.5, 3.5),
            ObjectClass::DisabledVehicle => (1.5, 2.2),
            ObjectClass::Other => (0.1, 0.2),
        }
    }

    pub(crate) fn height_range(self) -> (f64, f64) {
        match self {
            ObjectClass::Tree => (4.0, 10.0),
            ObjectClass::Bush => (0.6, 1.5),
            ObjectClass::Rock => (0.3, 1.2),
            ObjectClass::Cottage => (3.0, 4.0),
            ObjectClass::Building => (5.0, 10.0),
            ObjectClass::House => (4.0, 7.0),
            ObjectClass::DisabledVehicle => (1.5, 2.5),
            ObjectClass::Other => (1.0, 2.0),
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectClass {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(Self::from_label(s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverObject {
    pub object_id: i64,
    #[serde(rename = "class_name")]
    pub class: ObjectClass,
    /// Centre of the footprint at ground level.
    pub position: Point3,
    pub footprint_radius: f64,
    pub obj_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub heading: f64,
    pub v: f64,
    pub omega: f64,
    pub roll: f64,
    pub pitch: f64,
}

impl RobotState {
    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn position3(&self) -> Point3 {
        Point3::new(self.x, self.y, self.z)
    }
}

/// A velocity command: linear m/s and angular rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Command {
    pub v: f64,
    pub omega: f64,
}

impl Command {
    pub const STOP: Command = Command { v: 0.0, omega: 0.0 };

    pub const fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepEvent {
    None,
    Collision,
    GoalReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub robot_radius: f64,
    pub goal_tolerance: f64,
    /// Euler integration step.
    pub sim_dt: f64,
    /// Sensor/observer eye height above the terrain.
    pub eye_height: f64,
    /// Fixed observer positions for the optional visibility model.
    pub observers: Vec<Point3>,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self { robot_radius: 0.4, goal_tolerance: 0.5, sim_dt: 0.1, eye_height: 0.5, observers: Vec::new() }
    }
}

/// Planar unicycle update: heading first, then position along the new heading.
pub fn advance_pose(x: f64, y: f64, heading: f64, cmd: Command, dt: f64) -> (f64, f64, f64) {
    let heading = wrap_angle(heading + cmd.omega * dt);
    (x + cmd.v * heading.cos() * dt, y + cmd.v * heading.sin() * dt, heading)
}

/// Pitch from the slope along the heading, roll from the slope across it.
pub fn roll_pitch_at(grid: &ElevationGrid, x: f64, y: f64, heading: f64) -> Result<(f64, f64)> {
    let (gx, gy) = grid.gradient_at(x, y)?;
    let (s, c) = heading.sin_cos();
    let along = gx * c + gy * s;
    let across = -gx * s + gy * c;
    Ok((across.atan(), along.atan()))
}

#[derive(Debug, Clone)]
pub struct WorldState {
    pub grid: Arc<ElevationGrid>,
    pub objects: Arc<Vec<CoverObject>>,
    pub robot: RobotState,
    pub goal: Point2,
    pub tick: u64,
    pub rng: ChaCha8Rng,
    pub config: WorldConfig,
}

impl WorldState {
    pub fn new(grid: Arc<ElevationGrid>, objects: Arc<Vec<CoverObject>>, config: WorldConfig, seed: u64) -> Self {
        let c = grid.bounds().center();
        let mut world = Self {
            grid,
            objects,
            robot: RobotState::default(),
            goal: c,
            tick: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            config,
        };
        // a placeholder pose; callers spawn before use
        if let Ok(robot) = world.robot_at(c.x, c.y, 0.0) {
            world.robot = robot;
        }
        world
    }

    pub fn from_scenario(scenario: &Scenario, config: WorldConfig, seed: u64) -> Self {
        Self::new(Arc::new(scenario.grid.clone()), Arc::new(scenario.objects.clone()), config, seed)
    }

    /// Region the robot may occupy: the grid shrunk by one cell so terrain
    /// slopes are always defined.
    pub fn navigable_bounds(&self) -> Rect {
        let b = self.grid.bounds();
        let m = self.grid.cell_size();
        Rect::new(b.min_x + m, b.min_y + m, b.max_x - m, b.max_y - m)
    }

    pub fn in_bounds(&self, p: Point2) -> bool {
        self.navigable_bounds().contains(p)
    }

    /// Robot at rest at (x, y) with terrain-consistent z, roll and pitch.
    pub fn robot_at(&self, x: f64, y: f64, heading: f64) -> Result<RobotState> {
        let heading = wrap_angle(heading);
        let z = self.grid.elevation_at(x, y)?;
        let (roll, pitch) = roll_pitch_at(&self.grid, x, y, heading)?;
        Ok(RobotState { x, y, z, heading, v: 0.0, omega: 0.0, roll, pitch })
    }

    pub fn collision_check(&self, pos: Point2, robot_radius: f64) -> bool {
        if !self.in_bounds(pos) {
            return true;
        }
        self.objects.iter().any(|o| o.position.xy().distance(&pos) < o.footprint_radius + robot_radius)
    }

    /// Clearance between the robot disc at `pos` and the nearest footprint.
    pub fn clearance(&self, pos: Point2) -> f64 {
        self.objects
            .iter()
            .map(|o| o.position.xy().distance(&pos) - o.footprint_radius - self.config.robot_radius)
            .fold(f64::INFINITY, f64::min)
    }

    /// Places the robot uniformly in `zone` with a uniform heading in (-pi, pi].
    pub fn spawn_robot(&mut self, zone: Rect) -> Result<RobotState> {
        if !zone.is_valid() {
            return Err(Error::InvalidZone(format!("{zone:?} is not a rectangle")));
        }
        if !self.navigable_bounds().contains_rect(&zone) {
            return Err(Error::InvalidZone(format!("{zone:?} leaves the navigable area")));
        }
        let r = self.config.robot_radius;
        if let Some(o) = self.objects.iter().find(|o| zone.distance_to(o.position.xy()) < o.footprint_radius + r) {
            return Err(Error::InvalidZone(format!("zone intersects object {}", o.object_id)));
        }
        let x = sample_interval(&mut self.rng, zone.min_x, zone.max_x);
        let y = sample_interval(&mut self.rng, zone.min_y, zone.max_y);
        let heading = PI - 2.0 * PI * self.rng.random::<f64>();
        let robot = self.robot_at(x, y, heading)?;
        self.robot = robot;
        Ok(robot)
    }

    fn goal_is_free(&self, p: Point2) -> bool {
        !self.collision_check(p, self.config.robot_radius)
    }

    /// Uniform (by area) goal within `max_radius` of the robot, in bounds and
    /// clear of every footprint.
    pub fn sample_goal(&mut self, max_radius: f64) -> Result<Point2> {
        const ATTEMPTS: usize = 1000;
        let origin = self.robot.position();
        for _ in 0..ATTEMPTS {
            let r = max_radius * self.rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * self.rng.random::<f64>();
            let p = Point2::new(origin.x + r * theta.cos(), origin.y + r * theta.sin());
            if p.distance(&origin) <= max_radius && self.goal_is_free(p) {
                self.goal = p;
                return Ok(p);
            }
        }
        Err(Error::NoValidGoal { attempts: ATTEMPTS })
    }

    /// Uniform goal inside `zone`, additionally limited to `max_radius`.
    pub fn sample_goal_in(&mut self, zone: Rect, max_radius: f64) -> Result<Point2> {
        const ATTEMPTS: usize = 1000;
        let origin = self.robot.position();
        for _ in 0..ATTEMPTS {
            let p = Point2::new(
                sample_interval(&mut self.rng, zone.min_x, zone.max_x),
                sample_interval(&mut self.rng, zone.min_y, zone.max_y),
            );
            if p.distance(&origin) <= max_radius && self.goal_is_free(p) {
                self.goal = p;
                return Ok(p);
            }
        }
        Err(Error::NoValidGoal { attempts: ATTEMPTS })
    }

    /// One Euler step. Leaving the navigable area or touching an object is a
    /// `Collision`; the robot then stays at its last free pose, stopped.
    pub fn step(&self, cmd: Command, dt: f64) -> Result<(WorldState, StepEvent)> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        let mut next = self.clone();
        next.tick += 1;
        let (x, y, heading) = advance_pose(self.robot.x, self.robot.y, self.robot.heading, cmd, dt);
        let pos = Point2::new(x, y);
        if self.collision_check(pos, self.config.robot_radius) {
            next.robot.v = 0.0;
            next.robot.omega = 0.0;
            return Ok((next, StepEvent::Collision));
        }
        let mut robot = self.robot_at(x, y, heading)?;
        robot.v = cmd.v;
        robot.omega = cmd.omega;
        next.robot = robot;
        let event = if pos.distance(&self.goal) <= self.config.goal_tolerance {
            StepEvent::GoalReached
        } else {
            StepEvent::None
        };
        Ok((next, event))
    }

    /// Terrain and cylinder occlusion test between two 3D points.
    pub fn line_of_sight(&self, a: Point3, b: Point3) -> bool {
        self.line_of_sight_excluding(a, b, None)
    }

    /// As [`line_of_sight`](Self::line_of_sight), ignoring one object (the
    /// target being looked at).
    pub fn line_of_sight_excluding(&self, a: Point3, b: Point3, exclude: Option<i64>) -> bool {
        // canonical endpoint order makes the test exactly symmetric
        let (a, b) = if (a.x, a.y, a.z) <= (b.x, b.y, b.z) { (a, b) } else { (b, a) };
        let (dx, dy, dz) = (b.x - a.x, b.y - a.y, b.z - a.z);
        let len2 = dx * dx + dy * dy;
        let len = len2.sqrt();

        let steps = (len / self.grid.cell_size()).ceil() as usize;
        for k in 1..steps {
            let t = k as f64 / steps as f64;
            let (x, y) = (a.x + t * dx, a.y + t * dy);
            match self.grid.elevation_at(x, y) {
                Ok(h) if a.z + t * dz < h => return false,
                Ok(_) => {}
                Err(_) => return false,
            }
        }

        if len2 == 0.0 {
            return true;
        }
        for o in self.objects.iter() {
            if Some(o.object_id) == exclude {
                continue;
            }
            // segment-circle intersection in the plane
            let (fx, fy) = (a.x - o.position.x, a.y - o.position.y);
            let bq = 2.0 * (fx * dx + fy * dy);
            let cq = fx * fx + fy * fy - o.footprint_radius * o.footprint_radius;
            let disc = bq * bq - 4.0 * len2 * cq;
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            let t0 = ((-bq - sq) / (2.0 * len2)).max(0.0);
            let t1 = ((-bq + sq) / (2.0 * len2)).min(1.0);
            if t0 > t1 {
                continue;
            }
            let top = o.position.z + o.obj_height;
            if (a.z + t0 * dz).min(a.z + t1 * dz) < top {
                return false;
            }
        }
        true
    }

    /// Fraction of configured observers that can see the robot (0 when none).
    pub fn visibility(&self) -> f64 {
        if self.config.observers.is_empty() {
            return 0.0;
        }
        let eye = Point3::new(self.robot.x, self.robot.y, self.robot.z + self.config.eye_height);
        let seen = self.config.observers.iter().filter(|o| self.line_of_sight(**o, eye)).count();
        seen as f64 / self.config.observers.len() as f64
    }
}

fn sample_interval(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        lo + (hi - lo) * rng.random::<f64>()
    } else {
        lo
    }
}

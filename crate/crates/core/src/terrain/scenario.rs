use super::ElevationGrid;
use crate::error::{Error, Result};
use crate::geom::{Point2, Point3, Rect};
use crate::world::{CoverObject, ObjectClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Terrain classes used for evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioKind {
    NormalElevation,
    LowElevation,
    LowHighElevation,
    ForestJungle,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::NormalElevation,
        ScenarioKind::LowElevation,
        ScenarioKind::LowHighElevation,
        ScenarioKind::ForestJungle,
    ];

    /// Range the generated relief (max - min height) is drawn from.
    fn relief_range(self) -> (f64, f64) {
        match self {
            ScenarioKind::NormalElevation => (0.05, 0.25),
            ScenarioKind::LowElevation => (0.4, 0.95),
            ScenarioKind::LowHighElevation => (1.2, 2.8),
            ScenarioKind::ForestJungle => (4.2, 6.0),
        }
    }

    fn density_multiplier(self) -> f64 {
        match self {
            ScenarioKind::ForestJungle => 2.5,
            _ => 1.0,
        }
    }

    fn class_mix(self) -> &'static [(ObjectClass, f64)] {
        use ObjectClass::*;
        match self {
            ScenarioKind::NormalElevation => {
                &[(Tree, 0.3), (Bush, 0.3), (Rock, 0.3), (DisabledVehicle, 0.05), (Other, 0.05)]
            }
            ScenarioKind::LowElevation => &[
                (Building, 0.08),
                (House, 0.1),
                (Cottage, 0.12),
                (Rock, 0.2),
                (Bush, 0.2),
                (Tree, 0.15),
                (DisabledVehicle, 0.1),
                (Other, 0.05),
            ],
            ScenarioKind::LowHighElevation => &[(Tree, 0.3), (Rock, 0.3), (Bush, 0.25), (Cottage, 0.1), (Other, 0.05)],
            ScenarioKind::ForestJungle => &[(Tree, 0.55), (Bush, 0.35), (Rock, 0.1)],
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            ScenarioKind::NormalElevation => "normal",
            ScenarioKind::LowElevation => "low",
            ScenarioKind::LowHighElevation => "low-high",
            ScenarioKind::ForestJungle => "forest",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ScenarioKind::NormalElevation => "NormalElevation",
            ScenarioKind::LowElevation => "LowElevation",
            ScenarioKind::LowHighElevation => "LowHighElevation",
            ScenarioKind::ForestJungle => "ForestJungle",
        };
        f.write_str(name)
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).map(|c| c.to_ascii_lowercase()).collect();
        match key.as_str() {
            "normal" | "normalelevation" => Ok(ScenarioKind::NormalElevation),
            "low" | "lowelevation" => Ok(ScenarioKind::LowElevation),
            "lowhigh" | "lowhighelevation" => Ok(ScenarioKind::LowHighElevation),
            "forest" | "jungle" | "forestjungle" | "forestandjungle" => Ok(ScenarioKind::ForestJungle),
            _ => Err(Error::InvalidSpec(format!("unknown scenario kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub seed: u64,
    /// Side length of the square map in meters.
    pub extent: f64,
    /// Objects per 100 square meters, before the per-kind multiplier.
    pub object_density: f64,
    pub cell_size: f64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        Self { kind, seed, extent: 40.0, object_density: 1.5, cell_size: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.extent >= 30.0 && self.extent.is_finite()) {
            return Err(Error::InvalidSpec(format!("extent {} must be at least 30 m", self.extent)));
        }
        if !(self.object_density >= 0.0 && self.object_density.is_finite()) {
            return Err(Error::InvalidSpec(format!("object density {} must be non-negative", self.object_density)));
        }
        if !(self.cell_size > 0.0 && self.cell_size <= self.extent / 8.0) {
            return Err(Error::InvalidSpec(format!("cell size {} out of range", self.cell_size)));
        }
        if self.extent / self.cell_size > 4096.0 {
            return Err(Error::InvalidSpec("grid would exceed 4096 cells per side".into()));
        }
        Ok(())
    }

    fn nodes_per_side(&self) -> usize {
        (self.extent / self.cell_size).round() as usize + 1
    }
}

/// A generated (or loaded) world: terrain, objects and episode zones.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub grid: ElevationGrid,
    pub objects: Vec<CoverObject>,
    /// Robots spawn uniformly inside this rectangle.
    pub start_zone: Rect,
    /// When set, goals are drawn from this rectangle instead of the radius sampler.
    pub goal_zone: Option<Rect>,
}

/// Clearance kept between generated objects and the start zone.
const START_CLEARANCE: f64 = 1.5;
/// Minimum free gap between two generated footprints.
const OBJECT_GAP: f64 = 1.0;

fn draw_relief_field(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<ElevationGrid> {
    let n = spec.nodes_per_side();
    let extent = (n - 1) as f64 * spec.cell_size;
    let hill_count = ((extent * extent) / 60.0).round().max(6.0) as usize;
    let positive_bias = matches!(spec.kind, ScenarioKind::ForestJungle);
    let hills: Vec<(f64, f64, f64, f64)> = (0..hill_count)
        .map(|_| {
            let cx = rng.random_range(-0.1 * extent..1.1 * extent);
            let cy = rng.random_range(-0.1 * extent..1.1 * extent);
            let sigma = rng.random_range(2.5..8.0);
            let amp = if positive_bias { rng.random_range(0.2..1.0) } else { rng.random_range(-1.0..1.0) };
            (cx, cy, sigma, amp)
        })
        .collect();

    let raw = ElevationGrid::from_fn(n, n, spec.cell_size, Point2::default(), |x, y| {
        hills
            .iter()
            .map(|&(cx, cy, s, a)| {
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                a * (-d2 / (2.0 * s * s)).exp()
            })
            .sum()
    })?;

    let (lo, hi) = raw.heights().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &h| (lo.min(h), hi.max(h)));
    let (rmin, rmax) = spec.kind.relief_range();
    let target = rng.random_range(rmin..rmax);
    let range = hi - lo;
    let heights: Vec<f64> = if range > 1e-9 {
        raw.heights().iter().map(|h| (h - lo) * (target / range)).collect()
    } else {
        // degenerate field: fall back to a ramp with the target relief
        (0..n * n).map(|k| (k % n) as f64 / (n - 1) as f64 * target).collect()
    };
    ElevationGrid::new(n, n, spec.cell_size, Point2::default(), heights)
}

fn draw_class(mix: &[(ObjectClass, f64)], rng: &mut ChaCha8Rng) -> ObjectClass {
    let total: f64 = mix.iter().map(|(_, w)| w).sum();
    let mut u = rng.random_range(0.0..total);
    for &(class, w) in mix {
        if u < w {
            return class;
        }
        u -= w;
    }
    mix[mix.len() - 1].0
}

fn place_objects(
    spec: &ScenarioSpec,
    grid: &ElevationGrid,
    start_zone: &Rect,
    rng: &mut ChaCha8Rng,
) -> Vec<CoverObject> {
    let bounds = grid.bounds();
    let area = (bounds.max_x - bounds.min_x) * (bounds.max_y - bounds.min_y);
    let target = (spec.object_density * spec.kind.density_multiplier() * area / 100.0).round() as usize;
    let mix = spec.kind.class_mix();
    let margin = grid.cell_size();
    let mut objects: Vec<CoverObject> = Vec::with_capacity(target);
    let mut attempts = 0;
    while objects.len() < target && attempts < 200 * target.max(1) {
        attempts += 1;
        let class = draw_class(mix, rng);
        let (rlo, rhi) = class.footprint_range();
        let (hlo, hhi) = class.height_range();
        let radius = rng.random_range(rlo..rhi);
        let height = rng.random_range(hlo..hhi);
        let x = rng.random_range(bounds.min_x + margin + radius..bounds.max_x - margin - radius);
        let y = rng.random_range(bounds.min_y + margin + radius..bounds.max_y - margin - radius);
        let c = Point2::new(x, y);
        if start_zone.distance_to(c) <= radius + START_CLEARANCE {
            continue;
        }
        let overlaps = objects.iter().any(|o| o.position.xy().distance(&c) <= o.footprint_radius + radius + OBJECT_GAP);
        if overlaps {
            continue;
        }
        let z = grid.elevation_at(x, y).expect("object centre inside grid");
        objects.push(CoverObject {
            object_id: objects.len() as i64,
            class,
            position: Point3::new(x, y, z),
            footprint_radius: radius,
            obj_height: height,
        });
    }
    objects
}

/// Builds terrain and objects for `spec`. Identical specs give identical scenarios.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let grid = draw_relief_field(spec, &mut rng)?;
    let center = grid.bounds().center();
    let start_zone = Rect::centered(center, 2.0, 2.0);
    let objects = place_objects(spec, &grid, &start_zone, &mut rng);
    Ok(Scenario { spec: spec.clone(), grid, objects, start_zone, goal_zone: None })
}

/// Geometry of the cover-corridor evaluation layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorridorLayout {
    pub start: Point2,
    pub goal: Point2,
    /// Lateral bulge of the hedge arc away from the straight start-goal line.
    pub bulge: f64,
    /// Lateral offset of the hedge from the arc the robot is meant to follow.
    pub hedge_offset: f64,
    /// Spacing between consecutive bushes along the hedge.
    pub spacing: f64,
    /// Portion of the arc, as fractions from start to goal, that has bushes.
    pub hedge_span: (f64, f64),
    pub zone_half_size: f64,
}

impl Default for CorridorLayout {
    fn default() -> Self {
        Self {
            start: Point2::new(14.0, 15.0),
            goal: Point2::new(25.0, 15.0),
            bulge: 6.0,
            hedge_offset: 0.85,
            spacing: 1.0,
            hedge_span: (0.0, 0.7),
            zone_half_size: 0.5,
        }
    }
}

/// A low-elevation map with a hedge of bushes arcing from the start zone to
/// the goal zone, leaving the straight line between them in the open.
pub fn cover_corridor_scenario(seed: u64, layout: &CorridorLayout) -> Result<Scenario> {
    let spec = ScenarioSpec { object_density: 0.0, ..ScenarioSpec::new(ScenarioKind::LowElevation, seed) };
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = draw_relief_field(&spec, &mut rng)?;
    let start_zone = Rect::centered(layout.start, layout.zone_half_size, layout.zone_half_size);
    let goal_zone = Rect::centered(layout.goal, layout.zone_half_size, layout.zone_half_size);
    let span = layout.goal.distance(&layout.start);
    if span <= 0.0 {
        return Err(Error::InvalidSpec("corridor start and goal coincide".into()));
    }
    let dir = Point2::new((layout.goal.x - layout.start.x) / span, (layout.goal.y - layout.start.y) / span);
    let left = Point2::new(-dir.y, dir.x);
    // Robot path: start + s*span*dir + bulge*sin(pi s)*left; the hedge sits
    // outside the arc at `hedge_offset`.
    let path = |s: f64| {
        let lat = layout.bulge * (PI * s).sin();
        Point2::new(layout.start.x + s * span * dir.x + lat * left.x, layout.start.y + s * span * dir.y + lat * left.y)
    };
    let samples = 400;
    let mut objects: Vec<CoverObject> = Vec::new();
    let mut travelled = 0.0;
    let mut next_at = 0.0;
    let mut prev = path(0.0);
    for k in 0..=samples {
        let s = k as f64 / samples as f64;
        let p = path(s);
        travelled += p.distance(&prev);
        prev = p;
        if travelled + 1e-12 < next_at {
            continue;
        }
        next_at += layout.spacing;
        if s < layout.hedge_span.0 || s > layout.hedge_span.1 {
            continue;
        }
        let ds = 1e-4;
        let (a, b) = (path((s - ds).max(0.0)), path((s + ds).min(1.0)));
        let len = a.distance(&b);
        let normal = Point2::new(-(b.y - a.y) / len, (b.x - a.x) / len);
        let c = Point2::new(p.x + layout.hedge_offset * normal.x, p.y + layout.hedge_offset * normal.y);
        let radius = rng.random_range(0.25..0.35);
        if start_zone.distance_to(c) <= radius + 0.45 || goal_zone.distance_to(c) <= radius + 0.45 {
            continue;
        }
        let z = grid.elevation_at(c.x, c.y)?;
        objects.push(CoverObject {
            object_id: objects.len() as i64,
            class: ObjectClass::Bush,
            position: Point3::new(c.x, c.y, z),
            footprint_radius: radius,
            obj_height: rng.random_range(0.8..1.4),
        });
    }
    Ok(Scenario { spec, grid, objects, start_zone, goal_zone: Some(goal_zone) })
}

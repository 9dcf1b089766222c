//! File formats: scenario JSON, trajectory CSV, learning curves and episode logs.

use super::episode::EpisodeLog;
use crate::geom::{Point2, Rect};
use crate::terrain::{ElevationGrid, Scenario, ScenarioKind, ScenarioSpec};
use crate::world::{CoverObject, StepEvent};
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zones {
    pub start: Rect,
    pub goal: Option<Rect>,
}

/// On-disk scenario. Heights are row-major, `width_cells` per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub extent_m: f64,
    pub cell_size_m: f64,
    pub object_density: f64,
    pub width_cells: usize,
    pub height_cells: usize,
    pub origin: Point2,
    pub heights: Vec<f64>,
    pub objects: Vec<CoverObject>,
    pub zones: Zones,
}

impl ScenarioDoc {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            kind: s.spec.kind,
            seed: s.spec.seed,
            extent_m: s.spec.extent,
            cell_size_m: s.grid.cell_size(),
            object_density: s.spec.object_density,
            width_cells: s.grid.width_cells(),
            height_cells: s.grid.height_cells(),
            origin: s.grid.origin(),
            heights: s.grid.heights().to_vec(),
            objects: s.objects.clone(),
            zones: Zones { start: s.start_zone, goal: s.goal_zone },
        }
    }

    pub fn into_scenario(self) -> crate::Result<Scenario> {
        let grid =
            ElevationGrid::new(self.width_cells, self.height_cells, self.cell_size_m, self.origin, self.heights)?;
        if !self.zones.start.is_valid() {
            return Err(crate::Error::InvalidZone("start zone is not a rectangle".into()));
        }
        let spec = ScenarioSpec {
            kind: self.kind,
            seed: self.seed,
            extent: self.extent_m,
            object_density: self.object_density,
            cell_size: self.cell_size_m,
        };
        Ok(Scenario { spec, grid, objects: self.objects, start_zone: self.zones.start, goal_zone: self.zones.goal })
    }
}

pub fn scenario_to_json(s: &Scenario) -> String {
    serde_json::to_string(&ScenarioDoc::from_scenario(s)).expect("scenario serializes")
}

pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text).context("parsing scenario document")?;
    Ok(doc.into_scenario()?)
}

pub fn save_scenario(s: &Scenario, path: &Path) -> Result<()> {
    fs::write(path, scenario_to_json(s)).with_context(|| format!("writing {}", path.display()))
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    scenario_from_json(&text).with_context(|| format!("loading {}", path.display()))
}

pub const TRAJECTORY_HEADER: &str =
    "tick,x,y,z,heading,v,omega,roll,pitch,r_goal,r_dir,r_stab,r_elev,r_cover,total,is_cover,event";

pub fn event_name(e: StepEvent) -> &'static str {
    match e {
        StepEvent::None => "none",
        StepEvent::Collision => "collision",
        StepEvent::GoalReached => "goal",
    }
}

/// One row per record, initial state included.
pub fn trajectory_csv(log: &EpisodeLog) -> String {
    let mut out = String::with_capacity(160 * log.records.len());
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in &log.records {
        let s = &r.state;
        let w = &r.reward;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.tick,
            s.x,
            s.y,
            s.z,
            s.heading,
            s.v,
            s.omega,
            s.roll,
            s.pitch,
            w.r_goal,
            w.r_dir,
            w.r_stab,
            w.r_elev,
            w.r_cover,
            w.total,
            r.cover.is_cover,
            event_name(r.event)
        );
    }
    out
}

/// `episode,return` rows.
pub fn curve_text(curve: &[f64]) -> String {
    let mut out = String::from("episode,return\n");
    for (i, r) in curve.iter().enumerate() {
        let _ = writeln!(out, "{i},{r}");
    }
    out
}

pub fn parse_curve(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v = l.split(',').nth(1).with_context(|| format!("malformed curve row {l:?}"))?;
            v.trim().parse::<f64>().with_context(|| format!("bad return {v:?}"))
        })
        .collect()
}

pub fn log_to_json(log: &EpisodeLog) -> String {
    serde_json::to_string(log).expect("log serializes")
}

pub fn log_from_json(text: &str) -> Result<EpisodeLog> {
    serde_json::from_str(text).context("parsing episode log")
}

pub fn save_log(log: &EpisodeLog, path: &Path) -> Result<()> {
    fs::write(path, log_to_json(log)).with_context(|| format!("writing {}", path.display()))
}

pub fn load_log(path: &Path) -> Result<EpisodeLog> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    log_from_json(&text)
}

use super::episode::{cumulative_abs_dh, success, trajectory_length, EpisodeLog};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub episodes: usize,
    /// Percent of episodes that reached the goal.
    pub success_rate: f64,
    pub mean_trajectory_length: f64,
    /// Wall-clock seconds per episode.
    pub mean_execution_time: f64,
    /// Simulated seconds per episode.
    pub mean_sim_time: f64,
    /// Fraction of all steps spent in cover.
    pub in_cover_ratio: f64,
    pub mean_abs_dh: f64,
}

impl Metrics {
    pub fn without_timing(&self) -> Self {
        Self { mean_execution_time: 0.0, ..self.clone() }
    }
}

pub fn aggregate(logs: &[EpisodeLog]) -> Result<Metrics> {
    if logs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = logs.len() as f64;
    let mean = |f: &dyn Fn(&EpisodeLog) -> f64| logs.iter().map(f).sum::<f64>() / n;
    let (covered, steps) = logs.iter().fold((0usize, 0usize), |(c, s), l| {
        (c + l.steps().iter().filter(|r| r.cover.is_cover).count(), s + l.steps().len())
    });
    Ok(Metrics {
        episodes: logs.len(),
        success_rate: 100.0 * logs.iter().filter(|l| success(l)).count() as f64 / n,
        mean_trajectory_length: mean(&trajectory_length),
        mean_execution_time: mean(&|l| l.wall_clock_s),
        mean_sim_time: mean(&|l| l.sim_time_s),
        in_cover_ratio: if steps == 0 { 0.0 } else { covered as f64 / steps as f64 },
        mean_abs_dh: mean(&cumulative_abs_dh),
    })
}

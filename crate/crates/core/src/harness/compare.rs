use super::episode::{run_episode, EpisodeLog, RunConfig};
use super::metrics::{aggregate, Metrics};
use super::policy::Policy;
use crate::error::{Error, Result};
use crate::terrain::Scenario;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Episode seed for run `index` on scenario `cell`. Every policy sees the
/// same seeds on a given scenario, so rows differ only by policy.
pub fn episode_seed(seed: u64, cell: usize, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell as u64 + 1);
    rng.set_word_pos(2 * index as u128);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub policy: String,
    pub scenario: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub episodes_per_cell: usize,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn row(&self, policy: &str, scenario: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.policy == policy && r.scenario == scenario)
    }

    pub fn without_timing(&self) -> Self {
        let rows = self.rows.iter().map(|r| ReportRow { metrics: r.metrics.without_timing(), ..r.clone() }).collect();
        Self { rows, ..self.clone() }
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:<22} {:>5} {:>9} {:>9} {:>9} {:>8} {:>9} {:>8}",
            "policy", "scenario", "n", "success%", "length_m", "exec_s", "sim_s", "in_cover", "abs_dh"
        );
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{:<14} {:<22} {:>5} {:>9.1} {:>9.3} {:>9.4} {:>8.2} {:>9.3} {:>8.3}",
                r.policy,
                r.scenario,
                m.episodes,
                m.success_rate,
                m.mean_trajectory_length,
                m.mean_execution_time,
                m.mean_sim_time,
                m.in_cover_ratio,
                m.mean_abs_dh
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs every (policy, scenario) cell and returns the logs grouped by cell,
/// policies outer, scenarios inner.
pub fn run_cells(
    policies: &[(String, Policy)],
    scenarios: &[(String, Scenario)],
    episodes: usize,
    seed: u64,
    cfg: &RunConfig,
) -> Result<Vec<Vec<EpisodeLog>>> {
    let jobs: Vec<(usize, usize, usize)> = (0..policies.len())
        .flat_map(|p| (0..scenarios.len()).flat_map(move |s| (0..episodes).map(move |i| (p, s, i))))
        .collect();
    let logs: Vec<EpisodeLog> = jobs
        .par_iter()
        .map(|&(p, s, i)| {
            let (name, policy) = &policies[p];
            let (id, scenario) = &scenarios[s];
            let mut log = run_episode(policy, scenario, id, cfg, episode_seed(seed, s, i))?;
            log.policy = name.clone();
            Ok(log)
        })
        .collect::<Result<_>>()?;
    let per_cell = episodes.max(1);
    Ok(logs.chunks(per_cell).map(<[EpisodeLog]>::to_vec).collect())
}

/// One metrics row per (policy, scenario).
pub fn compare(
    policies: &[(String, Policy)],
    scenarios: &[(String, Scenario)],
    episodes: usize,
    seed: u64,
    cfg: &RunConfig,
) -> Result<Report> {
    if episodes == 0 {
        return Err(Error::EmptyInput);
    }
    let cells = run_cells(policies, scenarios, episodes, seed, cfg)?;
    let mut rows = Vec::with_capacity(cells.len());
    for (k, logs) in cells.iter().enumerate() {
        let (policy, _) = &policies[k / scenarios.len()];
        let (scenario, _) = &scenarios[k % scenarios.len()];
        rows.push(ReportRow { policy: policy.clone(), scenario: scenario.clone(), metrics: aggregate(logs)? });
    }
    Ok(Report { seed, episodes_per_cell: episodes, rows })
}

//! Episode runner, metrics, policy comparison and file formats.

pub mod compare;
pub mod episode;
pub mod io;
pub mod metrics;
pub mod plot;
pub mod policy;

pub use compare::{compare, episode_seed, run_cells, Report, ReportRow};
pub use episode::{
    cumulative_abs_dh, run_episode, success, trajectory_length, EpisodeLog, FixedStart, RunConfig, StepRecord,
};
pub use metrics::{aggregate, Metrics};
pub use policy::Policy;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use covert_nav::drl::{train, Checkpoint, TrainConfig};
use covert_nav::env::{EnvConfig, NavEnv};
use covert_nav::harness::{self, io, plot, Policy, RunConfig};
use covert_nav::terrain::{cover_corridor_scenario, generate_scenario, CorridorLayout, Scenario, ScenarioSpec};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "covert-nav", version, about = "Cover-aware terrain navigation: simulate, train, evaluate")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a scenario file.
    GenScenario {
        /// normal, low, low-high, forest or corridor
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a DDPG agent on a scenario.
    Train {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = TrainConfig::default().episodes)]
        episodes: usize,
        #[arg(long, default_value_t = TrainConfig::default().steps_per_episode)]
        steps: usize,
        #[arg(long)]
        out_checkpoint: PathBuf,
        /// Per-episode returns as CSV; an SVG plot is written next to it.
        #[arg(long)]
        out_curve: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on a scenario.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 50)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_report: PathBuf,
        /// Directory for per-episode JSON logs and trajectory CSVs.
        #[arg(long)]
        out_logs: Option<PathBuf>,
    },
    /// Run several policies over several scenarios and tabulate the metrics.
    Compare {
        /// Comma-separated: dwa, random, stand-still, straight, or a checkpoint path
        #[arg(long, value_delimiter = ',')]
        policies: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        scenarios: Vec<PathBuf>,
        #[arg(long, default_value_t = 50)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON report; the text table goes to the same path with a .txt extension.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render an episode log as an SVG.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out_plot: PathBuf,
        /// Draw the map under the trajectory.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
}

fn scenario_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into())
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn gen_scenario(kind: &str, seed: u64) -> Result<Scenario> {
    if kind.eq_ignore_ascii_case("corridor") {
        return Ok(cover_corridor_scenario(seed, &CorridorLayout::default())?);
    }
    Ok(generate_scenario(&ScenarioSpec::new(kind.parse()?, seed))?)
}

fn parse_policy(name: &str) -> Result<(String, Policy, Option<EnvConfig>)> {
    let p = match name {
        "dwa" => Policy::Dwa,
        "random" => Policy::Random,
        "stand-still" => Policy::StandStill,
        "straight" => Policy::StraightToGoal,
        path => {
            let ckpt = Checkpoint::load(Path::new(path))?;
            let env = ckpt.env.clone();
            return Ok((scenario_id(Path::new(path)), Policy::from_checkpoint(&ckpt)?, Some(env)));
        }
    };
    Ok((name.to_string(), p, None))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::GenScenario { kind, seed, out } => {
            let s = gen_scenario(&kind, seed)?;
            write(&out, &io::scenario_to_json(&s))?;
            println!("{} objects, relief {:.3} m -> {}", s.objects.len(), s.grid.relief(), out.display());
        }
        Cmd::Train { scenario, seed, episodes, steps, out_checkpoint, out_curve } => {
            let sc = io::load_scenario(&scenario)?;
            let cfg = TrainConfig { seed, episodes, steps_per_episode: steps, ..TrainConfig::default() };
            let env_cfg = EnvConfig::default();
            let mut env = NavEnv::new(&sc, env_cfg.clone(), seed)?;
            let started = Instant::now();
            let out = train(&mut env, &cfg)?;
            println!(
                "{} episodes, {} steps in {:.1} s; final-10 success {:.0}%",
                episodes,
                out.total_steps,
                started.elapsed().as_secs_f64(),
                out.final_success_rate(10)
            );
            Checkpoint::new(&out.agent, &cfg, &env.config).save(&out_checkpoint)?;
            if let Some(path) = out_curve {
                write(&path, &io::curve_text(&out.curve))?;
                write(&path.with_extension("svg"), &plot::curve_svg(&out.curve))?;
            }
        }
        Cmd::Eval { checkpoint, scenario, episodes, seed, out_report, out_logs } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let sc = io::load_scenario(&scenario)?;
            let cfg = RunConfig { env: ckpt.env.clone(), ..RunConfig::default() };
            let policies = vec![("agent".to_string(), Policy::from_checkpoint(&ckpt)?)];
            let scenarios = vec![(scenario_id(&scenario), sc)];
            if episodes == 0 {
                bail!("--episodes must be positive");
            }
            let cells = harness::run_cells(&policies, &scenarios, episodes, seed, &cfg)?;
            let logs = &cells[0];
            let report = harness::Report {
                seed,
                episodes_per_cell: episodes,
                rows: vec![harness::ReportRow {
                    policy: "agent".into(),
                    scenario: scenarios[0].0.clone(),
                    metrics: harness::aggregate(logs)?,
                }],
            };
            write(&out_report, &report.to_json())?;
            print!("{}", report.to_table());
            if let Some(dir) = out_logs {
                fs::create_dir_all(&dir)?;
                for (i, log) in logs.iter().enumerate() {
                    io::save_log(log, &dir.join(format!("episode_{i:03}.json")))?;
                    write(&dir.join(format!("episode_{i:03}.csv")), &io::trajectory_csv(log))?;
                }
            }
        }
        Cmd::Compare { policies, scenarios, episodes, seed, out } => {
            if policies.is_empty() || scenarios.is_empty() {
                bail!("need at least one policy and one scenario");
            }
            let mut env = None;
            let mut named = Vec::new();
            for p in &policies {
                let (name, policy, cfg) = parse_policy(p)?;
                if let (Some(cfg), None) = (cfg, &env) {
                    env = Some(cfg);
                }
                named.push((name, policy));
            }
            let scenarios =
                scenarios.iter().map(|p| Ok((scenario_id(p), io::load_scenario(p)?))).collect::<Result<Vec<_>>>()?;
            let cfg = RunConfig { env: env.unwrap_or_default(), ..RunConfig::default() };
            let report = harness::compare(&named, &scenarios, episodes, seed, &cfg)?;
            let table = report.to_table();
            write(&out, &report.to_json())?;
            write(&out.with_extension("txt"), &table)?;
            print!("{table}");
        }
        Cmd::Replay { log, out_plot, scenario, out_csv } => {
            let log = io::load_log(&log)?;
            let sc = scenario.as_deref().map(io::load_scenario).transpose()?;
            write(&out_plot, &plot::trajectory_svg(sc.as_ref(), std::slice::from_ref(&log)))?;
            if let Some(path) = out_csv {
                write(&path, &io::trajectory_csv(&log))?;
            }
            println!(
                "{} steps, terminal {}, length {:.2} m",
                log.steps().len(),
                io::event_name(log.terminal),
                harness::trajectory_length(&log)
            );
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

mod common;

use common::{gradient_check_error, median, toy_mdp_run};
use covert_nav::drl::{train, TrainConfig};
use covert_nav::dwa::{build_window, project_to_feasible, select_velocity_dwa, DwaConfig};
use covert_nav::env::{EnvConfig, NavEnv, GOAL_RADIUS};
use covert_nav::geom::{Point2, Point3};
use covert_nav::harness::{compare, run_episode, Policy, RunConfig};
use covert_nav::perception::{detect_cover, CoverVerdict, Detection};
use covert_nav::reward::{r_cover, total_reward, RewardWeights, StepContext, COVER_CONTACT_PENALTY};
use covert_nav::terrain::{
    cover_corridor_scenario, generate_scenario, CorridorLayout, Scenario, ScenarioKind, ScenarioSpec,
};
use covert_nav::world::{RobotState, StepEvent, WorldState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

const REWARD_TOL: f64 = 1e-9;
const REWARD_CONTEXTS: usize = 1_000;
const REWARD_BUDGET_S: f64 = 1.0;
const COVER_SETS: usize = 10_000;
const COVER_BUDGET_S: f64 = 5.0;
const ROCK_FIXTURE_DISTANCE: f64 = 18.7176;
const DWA_STATES: usize = 10_000;
const GRAD_NETS: u64 = 50;
const GRAD_TOL: f64 = 1e-4;
const TOY_UPDATES: usize = 500;
const TOY_TOL: f64 = 0.1;
const GOAL_SAMPLES: usize = 10_000;
const LEARN_SEEDS: u64 = 5;
const LEARN_BUDGET_S: f64 = 300.0;
const LEARN_MIN_SUCCESS: f64 = 60.0;
const LEARN_MIN_MARGIN: f64 = 30.0;
const EVAL_EPISODES: usize = 50;
const COVER_MIN_GAP: f64 = 0.1;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &str, run: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = run();
    println!(
        "{} [{id}] {name}: {} ({:.2} s)",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        t.elapsed().as_secs_f64()
    );
    o.pass
}

fn wrap_oracle(a: f64) -> f64 {
    a.sin().atan2(a.cos())
}

fn reward_oracle_suite() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..REWARD_CONTEXTS {
        let w = RewardWeights {
            w_elev: rng.random_range(-2.0..0.0),
            n_history: rng.random_range(1..=8),
            w_min: rng.random_range(0.2..1.5),
            ..RewardWeights::default()
        };
        let hist_len = rng.random_range(1..=10);
        let ctx = StepContext {
            d_prev: rng.random_range(0.0..15.0),
            d_cur: rng.random_range(0.0..15.0),
            theta_prev: rng.random_range(-PI..PI),
            theta_cur: rng.random_range(-PI..PI),
            roll: rng.random_range(-0.8..0.8),
            pitch: rng.random_range(-0.8..0.8),
            elevation_history: (0..hist_len).map(|_| rng.random_range(-3.0..3.0)).collect(),
            h_cur: rng.random_range(-3.0..3.0),
            d_cover: if rng.random_bool(0.2) { f64::INFINITY } else { rng.random_range(0.0..3.0) },
        };
        let got = total_reward(&ctx, &w).unwrap();
        let goal = ctx.d_prev - ctx.d_cur;
        let dir = -wrap_oracle(ctx.theta_cur - ctx.theta_prev).abs();
        let stab = 1.0 / (ctx.roll.powi(2) + ctx.pitch.powi(2)).exp();
        let mut elev = 0.0;
        for i in 0..w.n_history.min(hist_len) {
            elev += w.w_elev * (ctx.h_cur - ctx.elevation_history[i]).abs();
        }
        let cover = if ctx.d_cover < 0.5 * w.w_min {
            -1000.0
        } else if ctx.d_cover <= 1.5 * w.w_min {
            ctx.d_cover - 0.5 * w.w_min
        } else {
            0.0
        };
        let sum = goal + dir + stab + elev + cover;
        for (a, b) in [
            (got.r_goal, goal),
            (got.r_dir, dir),
            (got.r_stab, stab),
            (got.r_elev, elev),
            (got.r_cover, cover),
            (got.total, sum),
        ] {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = t.elapsed().as_secs_f64();
    let w_min = 0.67;
    let lo = 0.5 * w_min;
    let hi = 1.5 * w_min;
    let breakpoints = COVER_CONTACT_PENALTY == -1000.0
        && r_cover(lo, w_min) == 0.0
        && r_cover(f64::from_bits(lo.to_bits() - 1), w_min) == -1000.0
        && r_cover(hi, w_min) == hi - lo
        && r_cover(f64::from_bits(hi.to_bits() + 1), w_min) == 0.0
        && r_cover(f64::INFINITY, w_min) == 0.0;
    Outcome {
        pass: worst <= REWARD_TOL && breakpoints && elapsed < REWARD_BUDGET_S,
        detail: format!(
            "max |err| {worst:.1e} over {REWARD_CONTEXTS} contexts, breakpoints exact: {breakpoints}, {elapsed:.3} s"
        ),
    }
}

fn detection(rng: &mut ChaCha8Rng, id: i64) -> Detection {
    const LABELS: [&str; 10] =
        ["Tree", "Bush", "Rock", "Cottage", "Building", "House", "Junk Car", "Other", "person", "Disabled Vehicle"];
    const CONF: [f64; 5] = [0.85, 0.8499999999999999, 0.85000000001, 1.0, 0.3];
    // Exact-distance offsets: each has length 10.
    const EXACT: [(f64, f64, f64); 3] = [(0.0, 0.0, 10.0), (6.0, 0.0, 8.0), (0.0, -8.0, 6.0)];
    let confidence =
        if rng.random_bool(0.5) { CONF[rng.random_range(0..CONF.len())] } else { rng.random_range(0.0..1.0) };
    let (x, y, z) = match rng.random_range(0..4) {
        0 => EXACT[rng.random_range(0..EXACT.len())],
        1 => (rng.random_range(-3..=3) as f64, 0.0, rng.random_range(5..=12) as f64),
        _ => (rng.random_range(-12.0..12.0), rng.random_range(-2.0..2.0), rng.random_range(0.0..20.0)),
    };
    Detection {
        class_id: 0,
        class_name: LABELS[rng.random_range(0..LABELS.len())].to_string(),
        confidence,
        x_min: 0.0,
        y_min: 0.0,
        x_max: 1.0,
        y_max: 1.0,
        object_id: id,
        x_pos: x,
        y_pos: y,
        z_pos: z,
        kpts: vec![],
    }
}

fn cover_oracle(dets: &[Detection]) -> CoverVerdict {
    const COVER_LABELS: [&str; 8] =
        ["tree", "bush", "rock", "cottage", "building", "house", "junk car", "disabled vehicle"];
    let qualifying: Vec<&Detection> = dets
        .iter()
        .filter(|d| COVER_LABELS.contains(&d.class_name.to_lowercase().as_str()) && d.confidence >= 0.85)
        .collect();
    let dist = |d: &Detection| (d.x_pos * d.x_pos + d.y_pos * d.y_pos + d.z_pos * d.z_pos).sqrt();
    let Some(best_d) = qualifying.iter().map(|d| dist(d)).reduce(f64::min) else {
        return CoverVerdict::none();
    };
    let best = qualifying.iter().filter(|d| dist(d) == best_d).min_by_key(|d| d.object_id).unwrap();
    CoverVerdict {
        is_cover: best_d <= 10.0,
        cover_distance: best_d,
        nearest_object_id: Some(best.object_id),
        nearest_position: Some(Point3::new(best.x_pos, best.y_pos, best.z_pos)),
    }
}

fn cover_detection_equivalence() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    let (mut at_conf, mut at_dist) = (0, 0);
    for _ in 0..COVER_SETS {
        let n = rng.random_range(0..8);
        let mut ids: Vec<i64> = (0..n as i64).collect();
        ids.reverse();
        let dets: Vec<Detection> = ids.iter().map(|&id| detection(&mut rng, id)).collect();
        let got = detect_cover(&dets, Point3::default());
        let want = cover_oracle(&dets);
        if got != want {
            mismatches += 1;
        }
        if want.is_cover && want.cover_distance == 10.0 {
            at_dist += 1;
        }
        if dets.iter().any(|d| d.confidence == 0.85 && d.class().is_cover()) {
            at_conf += 1;
        }
    }
    let rock = Detection {
        class_id: 0,
        class_name: "Rock".into(),
        confidence: 1.0,
        x_min: 151.64044189453125,
        y_min: 118.20899963378906,
        x_max: 168.4332275390625,
        y_max: 112.97318267822266,
        object_id: 68,
        x_pos: -0.18053817749023438,
        y_pos: -0.46726706624031067,
        z_pos: 18.7108097076416,
        kpts: vec![],
    };
    let v = detect_cover(&[rock], Point3::default());
    let rock_ok = !v.is_cover && (v.cover_distance - ROCK_FIXTURE_DISTANCE).abs() < 1e-4;
    let elapsed = t.elapsed().as_secs_f64();
    Outcome {
        pass: mismatches == 0 && at_dist > 0 && at_conf > 0 && rock_ok && elapsed < COVER_BUDGET_S,
        detail: format!(
            "{mismatches} mismatches in {COVER_SETS} sets ({at_conf} with confidence 0.85, {at_dist} verdicts at exactly 10 m), \
             rock fixture distance {:.4} is_cover {}",
            v.cover_distance, v.is_cover
        ),
    }
}

fn dwa_feasibility() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = DwaConfig::default();
    let lim = cfg.limits;
    let worlds: Vec<WorldState> = ScenarioKind::ALL
        .iter()
        .flat_map(|&k| (0..3).map(move |s| (k, s)))
        .map(|(k, s)| {
            let sc = generate_scenario(&ScenarioSpec::new(k, 100 + s)).unwrap();
            WorldState::from_scenario(&sc, Default::default(), s)
        })
        .collect();
    let (mut states, mut violations, mut rollouts, mut collisions, mut selected) = (0, 0, 0usize, 0, 0);
    while states < DWA_STATES {
        let mut w = worlds[rng.random_range(0..worlds.len())].clone();
        let b = w.navigable_bounds();
        let (x, y) = (rng.random_range(b.min_x..b.max_x), rng.random_range(b.min_y..b.max_y));
        if w.collision_check(Point2::new(x, y), w.config.robot_radius) {
            continue;
        }
        let pose = w.robot_at(x, y, rng.random_range(-PI..PI)).unwrap();
        let (v0, w0) = (rng.random_range(lim.v_min..=lim.v_max), rng.random_range(-lim.omega_max..=lim.omega_max));
        w.robot = RobotState { v: v0, omega: w0, ..pose };
        w.goal = Point2::new(rng.random_range(b.min_x..b.max_x), rng.random_range(b.min_y..b.max_y));
        states += 1;

        let within = |v: f64, om: f64| {
            (v - v0).abs() <= lim.accel_v * cfg.dt
                && (om - w0).abs() <= lim.accel_omega * cfg.dt
                && v >= lim.v_min
                && v <= lim.v_max
                && om.abs() <= lim.omega_max
        };
        let window = build_window(&w, &cfg);
        let raw = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        let p = project_to_feasible(raw, &window);
        if !within(p.v, p.omega) {
            violations += 1;
        }
        if let Ok(c) = select_velocity_dwa(&w, w.goal, &cfg) {
            selected += 1;
            if !within(c.v, c.omega) {
                violations += 1;
            }
        }
        let steps = (cfg.horizon / cfg.rollout_dt).round() as usize;
        for c in window.candidates.iter().filter(|c| c.admissible) {
            rollouts += 1;
            let mut sim = w.clone();
            for _ in 0..steps {
                let (next, ev) = sim.step(c.command(), cfg.rollout_dt).unwrap();
                if ev == StepEvent::Collision {
                    collisions += 1;
                    break;
                }
                sim = next;
            }
        }
    }
    Outcome {
        pass: violations == 0 && collisions == 0,
        detail: format!(
            "{states} states, {selected} DWA selections, {violations} limit violations, \
             {collisions} collisions in {rollouts} admissible rollouts"
        ),
    }
}

fn gradient_check() -> Outcome {
    let worst = (0..GRAD_NETS).map(gradient_check_error).fold(0.0, f64::max);
    Outcome { pass: worst <= GRAD_TOL, detail: format!("worst relative error {worst:.2e} over {GRAD_NETS} networks") }
}

fn toy_mdp() -> Outcome {
    let run = toy_mdp_run(0, TOY_UPDATES);
    Outcome {
        pass: run.worst_error <= TOY_TOL,
        detail: format!("max |Q - Q*| {:.4} after {TOY_UPDATES} updates", run.worst_error),
    }
}

fn goal_radius_contract() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    let per = GOAL_SAMPLES / ScenarioKind::ALL.len();
    for (i, kind) in ScenarioKind::ALL.into_iter().enumerate() {
        let sc = generate_scenario(&ScenarioSpec::new(kind, 40 + i as u64)).unwrap();
        let mut env = NavEnv::new(&sc, EnvConfig::default(), i as u64).unwrap();
        for _ in 0..per {
            env.reset().unwrap();
            worst = worst.max(env.goal_distance());
            n += 1;
        }
    }
    Outcome { pass: n == GOAL_SAMPLES && worst <= GOAL_RADIUS, detail: format!("{n} goals, farthest {worst:.4} m") }
}

fn named(name: &str, sc: Scenario) -> Vec<(String, Scenario)> {
    vec![(name.to_string(), sc)]
}

fn desk_scale_learning() -> Outcome {
    let mut finals = Vec::new();
    let mut randoms = Vec::new();
    let mut evals = Vec::new();
    let mut slowest: f64 = 0.0;
    let cfg = RunConfig { measure_time: false, ..RunConfig::default() };
    for seed in 0..LEARN_SEEDS {
        let sc = generate_scenario(&ScenarioSpec::new(ScenarioKind::NormalElevation, seed)).unwrap();
        let mut env = NavEnv::new(&sc, EnvConfig::default(), seed).unwrap();
        let t = Instant::now();
        let out = train(&mut env, &TrainConfig { seed, ..TrainConfig::default() }).unwrap();
        slowest = slowest.max(t.elapsed().as_secs_f64());
        finals.push(out.final_success_rate(10));
        let policies =
            vec![("agent".to_string(), Policy::Agent(Arc::new(out.agent))), ("random".to_string(), Policy::Random)];
        let rep = compare(&policies, &named("normal", sc), EVAL_EPISODES, seed, &cfg).unwrap();
        evals.push(rep.rows[0].metrics.success_rate);
        randoms.push(rep.rows[1].metrics.success_rate);
    }
    let (m, r) = (median(&finals), median(&randoms));
    Outcome {
        pass: slowest < LEARN_BUDGET_S && m >= LEARN_MIN_SUCCESS && m - r >= LEARN_MIN_MARGIN,
        detail: format!(
            "final-10 success per seed {finals:?} (median {m:.0}%), random policy {randoms:?} (median {r:.0}%), \
             greedy eval {evals:?}, slowest run {slowest:.1} s"
        ),
    }
}

fn cover_following() -> Outcome {
    let sc = cover_corridor_scenario(0, &CorridorLayout::default()).unwrap();
    let mut env = NavEnv::new(&sc, EnvConfig::default(), 0).unwrap();
    let out = train(&mut env, &TrainConfig { seed: 0, ..TrainConfig::default() }).unwrap();
    let policies = vec![("agent".to_string(), Policy::Agent(Arc::new(out.agent))), ("dwa".to_string(), Policy::Dwa)];
    let cfg = RunConfig { measure_time: false, ..RunConfig::default() };
    let rep = compare(&policies, &named("corridor", sc), EVAL_EPISODES, 0, &cfg).unwrap();
    let (a, d) = (&rep.rows[0].metrics, &rep.rows[1].metrics);
    let gap = a.in_cover_ratio - d.in_cover_ratio;
    Outcome {
        pass: gap >= COVER_MIN_GAP,
        detail: format!(
            "in-cover ratio agent {:.3} vs DWA {:.3} (gap {gap:.3}); success {:.0}% vs {:.0}%",
            a.in_cover_ratio, d.in_cover_ratio, a.success_rate, d.success_rate
        ),
    }
}

fn determinism() -> Outcome {
    let sc = generate_scenario(&ScenarioSpec::new(ScenarioKind::NormalElevation, 6)).unwrap();
    let cfg = TrainConfig { episodes: 30, seed: 6, ..TrainConfig::default() };
    let run = || train(&mut NavEnv::new(&sc, EnvConfig::default(), 6).unwrap(), &cfg).unwrap();
    let (a, b) = (run(), run());
    let curves = a.curve.iter().map(|x| x.to_bits()).eq(b.curve.iter().map(|x| x.to_bits()))
        && a.agent.actor == b.agent.actor
        && a.agent.critic == b.agent.critic;

    let agent = Policy::Agent(Arc::new(a.agent));
    let rc = RunConfig::default();
    let logs = (0..5).all(|s| {
        let x = run_episode(&agent, &sc, "normal", &rc, s).unwrap().without_timing();
        let y = run_episode(&agent, &sc, "normal", &rc, s).unwrap().without_timing();
        serde_json::to_string(&x).unwrap() == serde_json::to_string(&y).unwrap()
    });

    let policies =
        vec![("agent".to_string(), agent), ("dwa".to_string(), Policy::Dwa), ("random".to_string(), Policy::Random)];
    let scenarios = named("normal", sc);
    let r1 = compare(&policies, &scenarios, 10, 6, &rc).unwrap().without_timing();
    let r2 = compare(&policies, &scenarios, 10, 6, &rc).unwrap().without_timing();
    let reports = r1.to_json() == r2.to_json();
    Outcome {
        pass: curves && logs && reports,
        detail: format!(
            "learning curves identical: {curves}, episode logs identical: {logs}, reports identical: {reports}"
        ),
    }
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [Criterion; 9] = [
        ("reward oracle suite", reward_oracle_suite),
        ("cover detection equivalence", cover_detection_equivalence),
        ("DWA feasibility guarantee", dwa_feasibility),
        ("gradient check", gradient_check),
        ("toy-MDP critic convergence", toy_mdp),
        ("goal-radius contract", goal_radius_contract),
        ("desk-scale learning", desk_scale_learning),
        ("cover-following behaviour", cover_following),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        if !report(i + 1, name, f) {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

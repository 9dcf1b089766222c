use covert_nav::geom::{Point2, Point3, Rect};
use covert_nav::harness::io::{
    curve_text, log_from_json, log_to_json, parse_curve, scenario_from_json, scenario_to_json, trajectory_csv,
    TRAJECTORY_HEADER,
};
use covert_nav::harness::plot::{curve_svg, trajectory_svg};
use covert_nav::harness::{
    aggregate, compare, run_episode, success, trajectory_length, EpisodeLog, FixedStart, Metrics, Policy, RunConfig,
    StepRecord,
};
use covert_nav::perception::CoverVerdict;
use covert_nav::reward::RewardBreakdown;
use covert_nav::terrain::{generate_scenario, ElevationGrid, Scenario, ScenarioKind, ScenarioSpec};
use covert_nav::world::{CoverObject, ObjectClass, RobotState, StepEvent};
use covert_nav::Error;
use proptest::prelude::*;

fn flat_world(objects: Vec<CoverObject>) -> Scenario {
    Scenario {
        spec: ScenarioSpec { object_density: 0.0, ..ScenarioSpec::new(ScenarioKind::NormalElevation, 0) },
        grid: ElevationGrid::flat(81, 81, 0.5, 0.0).unwrap(),
        objects,
        start_zone: Rect::centered(Point2::new(20.0, 20.0), 1.0, 1.0),
        goal_zone: None,
    }
}

fn fixed(goal: Point2) -> RunConfig {
    RunConfig {
        measure_time: false,
        fixed_start: Some(FixedStart { x: 20.0, y: 20.0, heading: 0.0, goal }),
        ..RunConfig::default()
    }
}

fn log_with(points: &[(f64, f64)], terminal: StepEvent) -> EpisodeLog {
    let records = points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| StepRecord {
            tick: i as u64,
            state: RobotState { x, y, ..RobotState::default() },
            command: Default::default(),
            reward: RewardBreakdown::default(),
            cover: CoverVerdict { is_cover: i % 2 == 1, ..CoverVerdict::none() },
            event: StepEvent::None,
        })
        .collect();
    EpisodeLog {
        scenario_id: "t".into(),
        policy: "p".into(),
        seed: 0,
        goal: Point2::default(),
        records,
        terminal,
        wall_clock_s: 1.0,
        sim_time_s: 2.0,
    }
}

#[test]
fn standing_still_times_out() {
    let sc = flat_world(vec![]);
    let log = run_episode(&Policy::StandStill, &sc, "flat", &fixed(Point2::new(23.0, 20.0)), 1).unwrap();
    assert_eq!(log.records.len(), 101);
    assert_eq!(log.terminal, StepEvent::None);
    assert!(!success(&log));
    assert_eq!(trajectory_length(&log), 0.0);
}

#[test]
fn straight_run_to_a_goal_three_meters_ahead() {
    let sc = flat_world(vec![]);
    let cfg = fixed(Point2::new(23.0, 20.0));
    let log = run_episode(&Policy::StraightToGoal, &sc, "flat", &cfg, 1).unwrap();
    assert_eq!(log.terminal, StepEvent::GoalReached);
    assert!(success(&log));
    let tol = cfg.env.world.goal_tolerance;
    let len = trajectory_length(&log);
    assert!((len - 3.0).abs() <= tol, "length {len}");
    assert!(log.records.windows(2).all(|w| w[1].tick > w[0].tick));
}

#[test]
fn driving_into_a_rock_collides() {
    let rock = CoverObject {
        object_id: 0,
        class: ObjectClass::Rock,
        position: Point3::new(22.0, 20.0, 0.0),
        footprint_radius: 0.6,
        obj_height: 1.0,
    };
    let sc = flat_world(vec![rock]);
    let log = run_episode(&Policy::StraightToGoal, &sc, "rock", &fixed(Point2::new(25.0, 20.0)), 1).unwrap();
    assert_eq!(log.terminal, StepEvent::Collision);
    assert!(log.steps().len() < 100);
    assert!(!success(&log));
}

#[test]
fn path_length_is_not_displacement() {
    assert_eq!(trajectory_length(&log_with(&[(1.0, 1.0)], StepEvent::None)), 0.0);
    let line: Vec<(f64, f64)> = (0..=10).map(|i| (0.1 * i as f64, 0.0)).collect();
    assert!((trajectory_length(&log_with(&line, StepEvent::None)) - 1.0).abs() < 1e-12);
    let square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)];
    assert!((trajectory_length(&log_with(&square, StepEvent::None)) - 4.0).abs() < 1e-12);
}

#[test]
fn success_is_goal_only() {
    assert!(success(&log_with(&[(0.0, 0.0)], StepEvent::GoalReached)));
    assert!(!success(&log_with(&[(0.0, 0.0)], StepEvent::Collision)));
    assert!(!success(&log_with(&[(0.0, 0.0)], StepEvent::None)));
}

#[test]
fn aggregate_examples() {
    assert_eq!(aggregate(&[]), Err(Error::EmptyInput));
    let logs: Vec<EpisodeLog> = (0..10)
        .map(|i| log_with(&[(0.0, 0.0)], if i < 7 { StepEvent::GoalReached } else { StepEvent::Collision }))
        .collect();
    assert_eq!(aggregate(&logs).unwrap().success_rate, 70.0);

    let mixed = [log_with(&[(0.0, 0.0)], StepEvent::None), log_with(&[(0.0, 0.0), (2.0, 0.0)], StepEvent::None)];
    assert_eq!(aggregate(&mixed).unwrap().mean_trajectory_length, 1.0);

    let one = log_with(&[(0.0, 0.0), (3.0, 4.0), (3.0, 5.0)], StepEvent::GoalReached);
    let m = aggregate(std::slice::from_ref(&one)).unwrap();
    let m3 = aggregate(&[one.clone(), one.clone(), one.clone()]).unwrap();
    assert_eq!(m.mean_trajectory_length, 6.0);
    assert_eq!(m.mean_execution_time, 1.0);
    assert_eq!(m.mean_sim_time, 2.0);
    assert_eq!(m.in_cover_ratio, 0.5);
    assert_eq!(m.success_rate, 100.0);
    assert_eq!(Metrics { episodes: 1, ..m3 }, m);
}

#[test]
fn compare_single_cell_matches_aggregate() {
    let sc = generate_scenario(&ScenarioSpec::new(ScenarioKind::NormalElevation, 2)).unwrap();
    let cfg = RunConfig { measure_time: false, ..RunConfig::default() };
    let policies = vec![("dwa".to_string(), Policy::Dwa)];
    let scenarios = vec![("normal".to_string(), sc.clone())];
    let report = compare(&policies, &scenarios, 1, 7, &cfg).unwrap();
    assert_eq!(report.rows.len(), 1);
    let seed = covert_nav::harness::episode_seed(7, 0, 0);
    let log = run_episode(&Policy::Dwa, &sc, "normal", &cfg, seed).unwrap();
    assert_eq!(report.rows[0].metrics, aggregate(&[log]).unwrap());
    assert!(report.to_table().contains("dwa"));
    assert_eq!(serde_json::from_str::<covert_nav::harness::Report>(&report.to_json()).unwrap(), report);
}

#[test]
fn compare_is_deterministic() {
    let sc = generate_scenario(&ScenarioSpec::new(ScenarioKind::LowElevation, 4)).unwrap();
    let policies = vec![("dwa".to_string(), Policy::Dwa), ("random".to_string(), Policy::Random)];
    let scenarios = vec![("low".to_string(), sc)];
    let cfg = RunConfig::default();
    let a = compare(&policies, &scenarios, 6, 3, &cfg).unwrap();
    let b = compare(&policies, &scenarios, 6, 3, &cfg).unwrap();
    assert_eq!(a.without_timing(), b.without_timing());
}

#[test]
fn scenario_json_round_trips() {
    for kind in ScenarioKind::ALL {
        let sc = generate_scenario(&ScenarioSpec::new(kind, 8)).unwrap();
        assert_eq!(scenario_from_json(&scenario_to_json(&sc)).unwrap(), sc);
    }
    assert!(scenario_from_json("{\"kind\": 3}").is_err());
}

#[test]
fn trajectory_csv_has_fixed_columns() {
    let sc = generate_scenario(&ScenarioSpec::new(ScenarioKind::NormalElevation, 1)).unwrap();
    let log = run_episode(&Policy::Dwa, &sc, "n", &RunConfig::default(), 5).unwrap();
    let csv = trajectory_csv(&log);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tick,x,y,z,heading,v,omega,roll,pitch,r_goal,r_dir,r_stab,r_elev,r_cover,total,is_cover,event"
    );
    assert_eq!(TRAJECTORY_HEADER.split(',').count(), 17);
    assert_eq!(lines.clone().count(), log.records.len());
    assert!(lines.all(|l| l.split(',').count() == 17));
}

#[test]
fn plots_are_svg() {
    let sc = generate_scenario(&ScenarioSpec::new(ScenarioKind::NormalElevation, 1)).unwrap();
    let log = run_episode(&Policy::Dwa, &sc, "n", &RunConfig::default(), 5).unwrap();
    for svg in [
        trajectory_svg(Some(&sc), std::slice::from_ref(&log)),
        trajectory_svg(None, &[log]),
        curve_svg(&[1.0, -2.0, 3.0]),
    ] {
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
    assert!(curve_svg(&[]).contains("</svg>"));
}

#[test]
fn curve_text_round_trips() {
    let curve = vec![-3.25, 0.1, 17.0 / 3.0];
    let text = curve_text(&curve);
    assert!(text.starts_with("episode,return\n"));
    assert_eq!(parse_curve(&text).unwrap(), curve);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn logs_round_trip_through_json(seed in any::<u64>(), scenario in 0u64..4) {
        let sc = generate_scenario(&ScenarioSpec::new(ScenarioKind::ALL[scenario as usize], scenario)).unwrap();
        let cfg = RunConfig { env: covert_nav::env::EnvConfig { max_steps: 30, ..Default::default() }, ..RunConfig::default() };
        let log = run_episode(&Policy::Random, &sc, "x", &cfg, seed).unwrap();
        prop_assert!(log.records.len() <= 31);
        prop_assert_eq!(log_from_json(&log_to_json(&log)).unwrap(), log);
    }

    #[test]
    fn single_log_aggregate_is_exact(seed in any::<u64>()) {
        let sc = generate_scenario(&ScenarioSpec::new(ScenarioKind::NormalElevation, 0)).unwrap();
        let log = run_episode(&Policy::StraightToGoal, &sc, "n", &RunConfig::default(), seed).unwrap();
        let m = aggregate(std::slice::from_ref(&log)).unwrap();
        prop_assert_eq!(m.mean_trajectory_length, trajectory_length(&log));
        prop_assert_eq!(m.mean_execution_time, log.wall_clock_s);
        prop_assert_eq!(m.success_rate, if success(&log) { 100.0 } else { 0.0 });
        prop_assert!((0.0..=100.0).contains(&m.success_rate));
    }
}

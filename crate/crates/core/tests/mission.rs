use std::path::PathBuf;
use std::sync::OnceLock;

use tcs_core::gridmap::TRAVERSABILITY;
use tcs_core::mission::{self, Event, FailureReason, MissionLog, MissionRun, MissionState};
use tcs_core::scenario::{base_dir, load_scenario, Scenario};

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run_with(name: &str, edit: impl FnOnce(&mut Scenario)) -> (Scenario, MissionRun) {
    let path = shipped(name);
    let mut sc = load_scenario(&path).unwrap();
    edit(&mut sc);
    let setup = sc.build(base_dir(&path)).unwrap();
    let run = mission::run(&sc, setup).unwrap();
    (sc, run)
}

fn cliff_field() -> &'static (Scenario, MissionRun) {
    static RUN: OnceLock<(Scenario, MissionRun)> = OnceLock::new();
    RUN.get_or_init(|| run_with("cliff_field.json", |_| {}))
}

#[test]
fn flat_field_finishes_without_a_cliff() {
    let (_, run) = run_with("flat.json", |_| {});
    assert_eq!(run.summary.outcome, MissionState::Done);
    assert_eq!(run.log.state_sequence(), [MissionState::TandemNavigate, MissionState::Done]);
    assert!(run.log.events().all(|(_, e)| !matches!(e, Event::CliffCheck { cliff: true, .. })));
}

#[test]
fn cliff_without_a_pole_fails_for_lack_of_anchor() {
    let (sc, run) = run_with("cliff_no_pole.json", |_| {});
    assert_eq!(run.summary.outcome, MissionState::Failed(FailureReason::NoAnchor));
    let entered = run
        .log
        .records
        .iter()
        .find(|r| r.state == MissionState::AnchorSearch)
        .unwrap()
        .tick;
    let waited = (run.log.outcome.tick - entered) as f64 * sc.dt;
    assert!(waited >= sc.anchor.timeout - sc.dt, "gave up after {waited} s");
}

#[test]
fn tick_limit_ends_in_timeout() {
    let (_, run) = run_with("cliff_field.json", |s| s.max_ticks = 50);
    assert_eq!(run.summary.outcome, MissionState::Failed(FailureReason::Timeout));
    assert_eq!(run.log.records.len(), 50);
}

#[test]
fn log_is_well_formed_and_round_trips() {
    let (_, run) = cliff_field();
    let log = &run.log;
    assert!(log.records.windows(2).all(|w| w[1].tick == w[0].tick + 1));
    assert_eq!(log.records.iter().filter(|r| r.state.is_terminal()).count(), 1);
    assert_eq!(log.outcome.outcome, log.records.last().unwrap().state);
    let seq = log.state_sequence();
    assert!(seq.windows(2).all(|w| w[0].can_transition(w[1])));
    let back = MissionLog::from_ndjson(&log.to_ndjson()).unwrap();
    assert_eq!(&back, log);
}

#[test]
fn different_seeds_still_complete() {
    for seed in [1, 2, 3] {
        let (_, run) = run_with("cliff_field.json", |s| s.seed = seed);
        assert_eq!(run.summary.outcome, MissionState::Done, "seed {seed}");
    }
}

#[test]
fn ugv_keeps_to_traversable_cells_while_navigating() {
    let (sc, run) = cliff_field();
    let map = &run.map;
    let t = map.layer(TRAVERSABILITY).unwrap();
    for r in run.log.records.iter().filter(|r| r.state == MissionState::TandemNavigate) {
        let idx = map.position_to_index(r.ugv.x, r.ugv.y).unwrap();
        // One cell of tolerance for path tracking.
        let ok = (-1..=1).flat_map(|dr| (-1..=1).map(move |dc| (dr, dc))).any(|(dr, dc)| {
            idx.offset(dr, dc)
                .filter(|n| map.contains(*n))
                .and_then(|n| t[map.flat(n)])
                .is_some_and(|v| v >= sc.mission.traversability_floor)
        });
        assert!(ok, "tick {}: UGV on untraversable ground at {idx:?}", r.tick);
    }
}

#[test]
fn uav_circles_at_flight_radius_while_winding() {
    let (sc, run) = cliff_field();
    let pole = sc.world.poles[0].center;
    let mut n = 0;
    for r in run.log.records.iter().filter(|r| r.on_circle == Some(true)) {
        let d = (r.uav.x - pole[0]).hypot(r.uav.y - pole[1]);
        assert!((d - sc.winding.flight_radius).abs() <= 0.1, "tick {}: {d}", r.tick);
        n += 1;
    }
    assert!(n > 0);
}

#[test]
fn uav_lands_on_a_valid_site_and_the_winch_climbs() {
    let (sc, run) = cliff_field();
    let site = run.landing.unwrap();
    let uav = run.summary.uav_final;
    assert!((uav[0] - site.position[0]).abs() < 1e-9 && (uav[1] - site.position[1]).abs() < 1e-9);
    assert!(tcs_core::detect::landing_site_at(&run.map, site.cell, &sc.landing).unwrap().is_some());
    let climb: Vec<_> = run.log.records.iter().filter(|r| r.state == MissionState::WinchClimb).collect();
    assert!(climb.windows(2).all(|w| w[1].tether.deployed <= w[0].tether.deployed));
    assert!(climb.windows(2).all(|w| w[1].ugv.z >= w[0].ugv.z - 1e-9));
    let top = run.summary.ugv_final[2];
    assert!(top > 0.9, "UGV ended at z = {top}");
}

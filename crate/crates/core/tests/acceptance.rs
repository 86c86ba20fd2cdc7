//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

// `ensure!` negates its condition so that NaN counts as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcs_core::detect::{detect_cliff, peakness, CliffParams};
use tcs_core::gridmap::{CellIndex, GridMap, ELEVATION, TRAVERSABILITY};
use tcs_core::mapfilter::{min_filter, run_pipeline, traversability, traversability_raw, FilterParams};
use tcs_core::mission::{self, MissionRun, MissionState};
use tcs_core::planner::{astar_plan, PlanWeights};
use tcs_core::rng::{substream, HOOK_STREAM};
use tcs_core::scenario::{base_dir, load_scenario, write_artifacts};
use tcs_core::tether::{circle_trajectory, sample_hook_catch, HookModel, BIN_COUNT};

type Outcome = Result<String, String>;
type Layer = Vec<Option<f64>>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(elapsed: Duration, limit_s: f64) -> Outcome {
    let s = elapsed.as_secs_f64();
    ensure!(s < limit_s, "took {s:.2} s, limit {limit_s} s");
    Ok(format!("{s:.2} s"))
}

fn traversability_formula() -> Outcome {
    let t0 = Instant::now();
    let p = FilterParams::default();
    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let s = 0.8 * i as f64 / 9.0;
            let r = 0.15 * j as f64 / 9.0;
            let expected = 0.5 * (1.0 - s / 0.6) + 0.5 * (1.0 - r / 0.1);
            worst = worst.max((traversability_raw(s, r, &p) - expected).abs());
        }
    }
    ensure!(worst <= 1e-9, "max deviation {worst:e}");
    ensure!(traversability(0.0, 0.0, &p) == 1.0, "T(0, 0) != 1");
    ensure!(traversability(0.6, 0.1, &p) == 0.0, "T(0.6, 0.1) != 0");
    Ok(format!("max deviation {worst:e}, {}", within(t0.elapsed(), 1.0)?))
}

fn min_filter_window() -> Outcome {
    let t0 = Instant::now();
    let (n, res, radius) = (200usize, 0.05, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let zeros: Vec<usize> = (0..40).map(|_| rng.random_range(0..n * n)).collect();
    let random: Vec<Option<f64>> = (0..n * n).map(|_| Some(rng.random_range(0.5..=1.0))).collect();
    let p = FilterParams {
        min_filter_radius: radius,
        ..FilterParams::default()
    };
    let centre = |i: usize| ((i % n) as f64 * res, (i / n) as f64 * res);
    let filtered = |base: &[Option<f64>]| -> Result<(Layer, Layer), String> {
        let mut t = base.to_vec();
        for &z in &zeros {
            t[z] = Some(0.0);
        }
        let mut map = GridMap::new([0.0, 0.0], res, n, n).map_err(|e| e.to_string())?;
        map.set_layer(TRAVERSABILITY, t.clone()).map_err(|e| e.to_string())?;
        min_filter(&mut map, &p).map_err(|e| e.to_string())?;
        Ok((t, map.layer(TRAVERSABILITY).map_err(|e| e.to_string())?.to_vec()))
    };

    // Random background: equality with a window minimum over centre
    // distances, scanning a square one cell wider than the radius.
    let (t, out) = filtered(&random)?;
    let reach = (radius / res).ceil() as isize + 1;
    for i in 0..n * n {
        let (x, y) = centre(i);
        let (r0, c0) = ((i / n) as isize, (i % n) as isize);
        let mut m = f64::INFINITY;
        for r in (r0 - reach).max(0)..=(r0 + reach).min(n as isize - 1) {
            for c in (c0 - reach).max(0)..=(c0 + reach).min(n as isize - 1) {
                let j = r as usize * n + c as usize;
                let (xj, yj) = centre(j);
                if (x - xj).hypot(y - yj) <= radius + 1e-9 {
                    m = m.min(t[j].unwrap());
                }
            }
        }
        ensure!(out[i] == Some(m), "cell {i}: {:?} != oracle {m}", out[i]);
    }

    // Uniform background: only the zeros spread, and only as far as the radius.
    let (t, out) = filtered(&vec![Some(1.0); n * n])?;
    let mut near_zero = 0usize;
    for i in 0..n * n {
        let (x, y) = centre(i);
        let nearest = zeros
            .iter()
            .map(|&z| {
                let (xz, yz) = centre(z);
                (x - xz).hypot(y - yz)
            })
            .fold(f64::INFINITY, f64::min);
        if nearest <= radius {
            near_zero += 1;
            ensure!(out[i] == Some(0.0), "cell {i} is {nearest} m from a zero but not zero");
        }
        if nearest > radius + 0.5 * res * 2f64.sqrt() {
            ensure!(out[i] == t[i], "cell {i} beyond the radius changed");
        }
    }
    Ok(format!("{near_zero} cells zeroed, {}", within(t0.elapsed(), 5.0)?))
}

/// Dijkstra over the 8-connected grid with per-cell entry costs.
fn dijkstra(costs: &[f64], rows: usize, cols: usize, start: usize) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; rows * cols];
    let mut heap = BinaryHeap::new();
    d[start] = 0.0;
    heap.push(Reverse((Key(0.0), start)));
    while let Some(Reverse((Key(g), i))) = heap.pop() {
        if g > d[i] {
            continue;
        }
        let (r, c) = ((i / cols) as isize, (i % cols) as isize);
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (nr, nc) = (r + dr, c + dc);
                if (dr, dc) == (0, 0) || nr < 0 || nc < 0 || nr >= rows as isize || nc >= cols as isize {
                    continue;
                }
                let j = nr as usize * cols + nc as usize;
                let cand = g + costs[j];
                if cand < d[j] {
                    d[j] = cand;
                    heap.push(Reverse((Key(cand), j)));
                }
            }
        }
    }
    d
}

#[derive(PartialEq)]
struct Key(f64);
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// `W_T / (T + eps) + W_E * (E - lowest)` for known cells, `W_NaN` otherwise.
fn oracle_costs(t: &[Option<f64>], e: &[Option<f64>], w: &PlanWeights) -> Vec<f64> {
    let lowest = t
        .iter()
        .zip(e)
        .filter(|(t, _)| t.is_some())
        .filter_map(|(_, e)| *e)
        .fold(f64::INFINITY, f64::min);
    t.iter()
        .zip(e)
        .map(|(t, e)| match (t, e) {
            (Some(t), Some(e)) => w.traversability / (t + w.epsilon) + w.elevation * (e - lowest),
            _ => w.unknown,
        })
        .collect()
}

fn astar_matches_dijkstra() -> Outcome {
    let t0 = Instant::now();
    let n = 40usize;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut found, mut none, mut worst) = (0, 0, 0.0f64);
    for k in 0..500 {
        let mut map = GridMap::new([0.0, 0.0], 0.1, n, n).map_err(|e| e.to_string())?;
        let p_invalid = rng.random_range(0.0..0.4);
        let (mut t, mut e) = (Vec::new(), Vec::new());
        for _ in 0..n * n {
            if rng.random_bool(p_invalid) {
                t.push(None);
                e.push(None);
            } else {
                t.push(Some(rng.random_range(0.0..=1.0)));
                e.push(Some(rng.random_range(-0.5..1.5)));
            }
        }
        map.set_layer(ELEVATION, e.clone()).map_err(|e| e.to_string())?;
        map.set_layer(TRAVERSABILITY, t.clone()).map_err(|e| e.to_string())?;
        let w = PlanWeights {
            traversability: rng.random_range(0.1..5.0),
            elevation: rng.random_range(0.0..3.0),
            unknown: if k % 2 == 0 { f64::INFINITY } else { rng.random_range(100.0..1e4) },
            epsilon: rng.random_range(0.005..0.1),
        };
        let costs = oracle_costs(&t, &e, &w);
        let (s, g) = (rng.random_range(0..n * n), rng.random_range(0..n * n));
        let at = |i: usize| [(i % n) as f64 * 0.1, (i / n) as f64 * 0.1];
        let d = dijkstra(&costs, n, n, s);
        let plan = astar_plan(&map, at(s), at(g), &w).map_err(|e| e.to_string())?;
        match plan {
            None => {
                ensure!(d[g].is_infinite(), "grid {k}: A* found no path, Dijkstra cost {}", d[g]);
                none += 1;
            }
            Some(path) => {
                ensure!(path.cost == d[g], "grid {k}: A* {} != Dijkstra {}", path.cost, d[g]);
                let cells: Vec<usize> = path.cells.iter().map(|c| c.row * n + c.col).collect();
                ensure!(cells[0] == s && *cells.last().unwrap() == g, "grid {k}: wrong endpoints");
                for pair in cells.windows(2) {
                    let (a, b) = (pair[0], pair[1]);
                    let dr = (a / n).abs_diff(b / n);
                    let dc = (a % n).abs_diff(b % n);
                    ensure!(dr <= 1 && dc <= 1 && a != b, "grid {k}: non-adjacent step");
                }
                let sum: f64 = cells[1..].iter().map(|&i| costs[i]).sum();
                worst = worst.max((sum - path.cost).abs());
                ensure!((sum - path.cost).abs() <= 1e-9, "grid {k}: recomputed {sum} vs {}", path.cost);
                found += 1;
            }
        }
    }
    Ok(format!(
        "{found} paths, {none} unreachable, max recompute error {worst:e}, {}",
        within(t0.elapsed(), 30.0)?
    ))
}

fn stencil_map(z: &[[f64; 7]; 7]) -> GridMap {
    let mut m = GridMap::new([0.0, 0.0], 0.1, 7, 7).unwrap();
    m.set_layer(ELEVATION, z.iter().flatten().map(|v| Some(*v)).collect())
        .unwrap();
    m
}

/// Moments and peakness by direct summation over the whole 7×7 stencil.
fn hand_moments(z: &[[f64; 7]; 7]) -> ([f64; 3], f64) {
    let lowest = z.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let (mut a, mut b, mut d) = (0.0, 0.0, 0.0);
    for (r, row) in z.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let (x, y) = ((c as f64 - 3.0) * 0.1, (r as f64 - 3.0) * 0.1);
            let h = v - lowest;
            a += h * x * x;
            b += h * x * y;
            d += h * y * y;
        }
    }
    let (a, b, d) = (a / 49.0, b / 49.0, d / 49.0);
    let tr = a + d;
    let det = a * d - b * b;
    let l = tr / 2.0 + (tr * tr / 4.0 - det).max(0.0).sqrt();
    ([a, b, d], 1.0 / l)
}

fn peakness_stencils() -> Outcome {
    // Whole 7×7 square is inside this radius.
    let radius = 0.3 * 2f64.sqrt() + 1e-6;
    let centre = CellIndex::new(3, 3);
    let mut ridge = [[0.0; 7]; 7];
    let mut peak = [[0.0; 7]; 7];
    for r in 0..7 {
        ridge[r][3] = 1.0 - 0.05 * (r as f64 - 3.0).abs();
        for c in 0..7 {
            let d = 0.1 * ((r as f64 - 3.0).powi(2) + (c as f64 - 3.0).powi(2)).sqrt();
            peak[r][c] = (1.0 - d / 0.15).max(0.0);
        }
    }
    let mut rotated = [[0.0; 7]; 7];
    for r in 0..7 {
        for c in 0..7 {
            rotated[c][6 - r] = ridge[r][c];
        }
    }
    let eval = |z: &[[f64; 7]; 7]| peakness(&stencil_map(z), centre, radius).unwrap().unwrap();
    let (pr, pp, pq) = (eval(&ridge), eval(&peak), eval(&rotated));
    for (name, cand, z) in [("ridge", &pr, &ridge), ("peak", &pp, &peak), ("rotated", &pq, &rotated)] {
        let ([a, b, d], k) = hand_moments(z);
        let cov = cand.covariance;
        ensure!(
            (cov[0][0] - a).abs() <= 1e-12 && (cov[0][1] - b).abs() <= 1e-12 && (cov[1][1] - d).abs() <= 1e-12,
            "{name}: covariance {cov:?} vs [{a}, {b}, {d}]"
        );
        ensure!((cand.peakness - k).abs() <= 1e-12 * k, "{name}: peakness {} vs {k}", cand.peakness);
    }
    // Closed forms: the ridge only has y-moment, the cone only its eight
    // nearest cells.
    let ridge_syy = 2.0 * (0.95 * 0.01 + 0.90 * 0.04 + 0.85 * 0.09) / 49.0;
    ensure!((pr.covariance[1][1] - ridge_syy).abs() <= 1e-12, "ridge closed form");
    let diag = 1.0 - 2f64.sqrt() * 0.1 / 0.15;
    let cone_sxx = (2.0 * (1.0 / 3.0) * 0.01 + 4.0 * diag * 0.01) / 49.0;
    ensure!((pp.covariance[0][0] - cone_sxx).abs() <= 1e-12, "cone closed form");
    ensure!(pp.peakness > 5.0 * pr.peakness, "peak {} vs ridge {}", pp.peakness, pr.peakness);
    ensure!(pq.peakness == pr.peakness, "rotated ridge {} != {}", pq.peakness, pr.peakness);
    Ok(format!(
        "ridge {:.3}, peak {:.3}, ratio {:.1}",
        pr.peakness,
        pp.peakness,
        pp.peakness / pr.peakness
    ))
}

/// Filtered 10 m × 10 m map at 5 cm with elevation `z(x, y)`.
fn filtered_map(z: impl Fn(f64, f64) -> f64) -> Result<GridMap, String> {
    let mut map = GridMap::new([0.0, 0.0], 0.05, 200, 200).map_err(|e| e.to_string())?;
    let e = map
        .indices()
        .map(|i| {
            let c = map.center(i);
            Some(z(c.x, c.y))
        })
        .collect();
    map.set_layer(ELEVATION, e).map_err(|e| e.to_string())?;
    run_pipeline(&mut map, &FilterParams::default()).map_err(|e| e.to_string())?;
    Ok(map)
}

/// Best `(sample, cost)` over the goal and its spiral perturbations by
/// Dijkstra from `start`.
fn cliff_oracle(map: &GridMap, start: [f64; 2], goal: [f64; 2], p: &CliffParams) -> ([f64; 2], f64) {
    let t = map.layer(TRAVERSABILITY).unwrap();
    let e = map.layer(tcs_core::gridmap::ELEVATION_INPAINTED).unwrap();
    let costs = oracle_costs(t, e, &PlanWeights::default());
    let s = map.position_to_index(start[0], start[1]).unwrap();
    let d = dijkstra(&costs, map.rows(), map.cols(), map.flat(s));
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut best = (goal, f64::INFINITY);
    for k in 0..=p.count {
        let r = p.radius * k as f64 / p.count as f64;
        let a = k as f64 * golden;
        let q = [goal[0] + r * a.cos(), goal[1] + r * a.sin()];
        let Ok(i) = map.position_to_index(q[0], q[1]) else {
            continue;
        };
        let c = d[map.flat(i)];
        if c < best.1 || (k == 0 && best.1.is_infinite()) {
            best = (q, c);
        }
    }
    best
}

fn cliff_detector() -> Outcome {
    let t0 = Instant::now();
    let w = PlanWeights::default();
    let p = CliffParams::default();
    let (start, goal) = ([3.0, 5.0], [7.0, 5.0]);
    let step = |x: f64, _y: f64| if x < 5.0 { 0.0 } else { 0.5 };
    let ramp = |x: f64, y: f64| {
        if (y - 5.0).abs() < 0.5 {
            0.5 * ((x - 4.25) / 1.5).clamp(0.0, 1.0)
        } else {
            step(x, y)
        }
    };
    let mut lines = Vec::new();
    for (name, map, want_cliff) in [("step", filtered_map(step)?, true), ("ramp gap", filtered_map(ramp)?, false)] {
        let rep = detect_cliff(&map, start, goal, &w, &p).map_err(|e| e.to_string())?;
        let (og, oc) = cliff_oracle(&map, start, goal, &p);
        ensure!(rep.best_cost == oc, "{name}: cost {} vs oracle {oc}", rep.best_cost);
        ensure!((rep.best_goal[0] - og[0]).abs() < 1e-12 && (rep.best_goal[1] - og[1]).abs() < 1e-12, "{name}: best goal");
        ensure!(rep.cliff == want_cliff, "{name}: cliff = {} at cost {}", rep.cliff, rep.best_cost);
        if !want_cliff {
            let path = rep.path.as_ref().ok_or("ramp gap: no path")?;
            for wp in &path.waypoints {
                if (4.25..=5.75).contains(&wp[0]) {
                    ensure!((wp[1] - 5.0).abs() < 0.5, "ramp gap: path leaves the gap at {wp:?}");
                }
            }
        }
        lines.push(format!("{name} cost {:.1}", rep.best_cost));
    }
    // A narrow post sits on the goal; perturbed goals reach past its
    // inflated footprint.
    let post = |x: f64, y: f64| if (x - 7.0).abs() <= 0.05 && (y - 5.0).abs() <= 0.05 { 0.5 } else { 0.0 };
    let map = filtered_map(post)?;
    let rep = detect_cliff(&map, start, goal, &w, &p).map_err(|e| e.to_string())?;
    let (og, oc) = cliff_oracle(&map, start, goal, &p);
    let goal_idx = map.position_to_index(goal[0], goal[1]).unwrap();
    ensure!(map.get(TRAVERSABILITY, goal_idx) == Some(0.0), "goal is not on the obstacle");
    ensure!(rep.best_cost == oc && rep.best_goal == og, "obstacle: oracle mismatch");
    ensure!(!rep.cliff, "obstacle: cliff reported at cost {}", rep.best_cost);
    ensure!(rep.best_goal != goal, "obstacle: best goal not displaced");
    lines.push(format!("goal on obstacle cost {:.1}", rep.best_cost));
    Ok(format!("{}, {}", lines.join(", "), within(t0.elapsed(), 10.0)?))
}

fn hook_and_winding() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..12 {
        let entry = -3.0 + 0.5 * k as f64;
        let (c, rad) = ([1.5, -2.0], 0.6);
        let uav = [c[0] + 3.0 * entry.cos(), c[1] + 3.0 * entry.sin()];
        let plan = circle_trajectory(c, 0.05, rad, 1.5, 180.0, 10.0, uav).map_err(|e| e.to_string())?;
        let last = plan.waypoints.last().unwrap();
        let end = (last[1] - c[1]).atan2(last[0] - c[0]);
        let diff = (end - entry).sin().hypot((end - entry).cos() + 1.0);
        worst = worst.max(diff);
    }
    ensure!(worst <= 1e-9, "end bearing off by {worst:e}");
    let model = HookModel::default();
    let best = model
        .probabilities
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap();
    ensure!(best == 0 || best == 9, "argmax bin {best}");
    let half = HookModel {
        probabilities: vec![0.5; BIN_COUNT],
        trials: vec![0; BIN_COUNT],
    };
    let mut rng = substream(11, HOOK_STREAM);
    let hits = (0..10_000).filter(|_| sample_hook_catch(&half, 90.0, &mut rng)).count();
    let rate = hits as f64 / 1e4;
    ensure!((rate - 0.5).abs() <= 0.02, "rate {rate}");
    Ok(format!("end bearing error {worst:e}, argmax bin {}°, rate {rate}", best * 20))
}

fn scenario_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/cliff_field.json")
}

fn run_cliff_field() -> Result<(MissionRun, Duration), String> {
    let path = scenario_path();
    let t0 = Instant::now();
    let sc = load_scenario(&path).map_err(|e| e.to_string())?;
    let setup = sc.build(base_dir(&path)).map_err(|e| e.to_string())?;
    let run = mission::run(&sc, setup).map_err(|e| e.to_string())?;
    Ok((run, t0.elapsed()))
}

fn whole_mission(run: &MissionRun, elapsed: Duration) -> Outcome {
    use MissionState::*;
    ensure!(run.summary.outcome == Done, "outcome {}", run.summary.outcome);
    let full = [
        TandemNavigate,
        CliffConfirmed,
        UavCrossCliff,
        AnchorSearch,
        WindTether,
        LandingSearch,
        Landed,
        WinchClimb,
        Done,
    ];
    let seq = run.log.state_sequence();
    ensure!(seq == full, "state sequence {seq:?}");
    let sc = load_scenario(&scenario_path()).map_err(|e| e.to_string())?;
    let inflation = sc.filter.min_filter_radius;
    let mut closest = f64::INFINITY;
    for b in &sc.world.obstacles {
        for r in &run.log.records {
            closest = closest.min(b.footprint_distance(r.ugv.x, r.ugv.y));
        }
    }
    ensure!(closest > inflation, "UGV came within {closest} m of the obstacle");
    let anchor = run.anchor.as_ref().ok_or("no anchor")?;
    let last = run.log.records.last().unwrap().ugv;
    let off = (last.x - anchor.position[0]).hypot(last.y - anchor.position[1]);
    ensure!(off <= 0.5, "final UGV {off} m from the anchor");
    Ok(format!(
        "{} ticks, obstacle clearance {closest:.3} m, final offset {off:.3} m, {}",
        run.summary.ticks,
        within(elapsed, 60.0)?
    ))
}

fn determinism(first: &MissionRun) -> Outcome {
    let (second, _) = run_cliff_field()?;
    ensure!(first.log == second.log, "logs differ");
    let (a, b) = (tempdir()?, tempdir()?);
    write_artifacts(first, a.path(), false).map_err(|e| e.to_string())?;
    write_artifacts(&second, b.path(), false).map_err(|e| e.to_string())?;
    let mut files = 0;
    for name in [
        "log.ndjson",
        "summary.json",
        "ugv_trajectory.csv",
        "uav_trajectory.csv",
        "ugv_path.csv",
        "uav_path.csv",
        "map/map.json",
    ] {
        let x = std::fs::read(a.path().join(name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join(name)).map_err(|e| e.to_string())?;
        ensure!(x == y, "{name} differs");
        files += 1;
    }
    Ok(format!("{files} artifacts byte-identical"))
}

fn tempdir() -> Result<tempfile::TempDir, String> {
    tempfile::tempdir().map_err(|e| e.to_string())
}

fn tether_conservation(run: &MissionRun) -> Outcome {
    let total = run.summary.tether_total;
    let mut worst = 0.0f64;
    for r in &run.log.records {
        let t = &r.tether;
        worst = worst.max((t.deployed + t.wound - total).abs());
        ensure!(t.length <= t.deployed, "tick {}: polyline {} > deployed {}", r.tick, t.length, t.deployed);
    }
    ensure!(worst <= 1e-9, "conservation error {worst:e}");
    Ok(format!("{} ticks, max error {worst:e}", run.log.records.len()))
}

fn report(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    match &result {
        Ok(detail) => println!("criterion {n} PASS  {name}: {detail}"),
        Err(why) => println!("criterion {n} FAIL  {name}: {why}"),
    }
    result.is_ok()
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= report(1, "traversability formula", traversability_formula);
    ok &= report(2, "minimum filter", min_filter_window);
    ok &= report(3, "A* equals Dijkstra", astar_matches_dijkstra);
    ok &= report(4, "peakness stencils", peakness_stencils);
    ok &= report(5, "cliff detector", cliff_detector);
    ok &= report(6, "hook model and winding", hook_and_winding);
    match run_cliff_field() {
        Ok((run, elapsed)) => {
            ok &= report(7, "cliff-field mission", || whole_mission(&run, elapsed));
            ok &= report(8, "determinism", || determinism(&run));
            ok &= report(9, "tether conservation", || tether_conservation(&run));
        }
        Err(e) => {
            for (n, name) in [(7, "cliff-field mission"), (8, "determinism"), (9, "tether conservation")] {
                println!("criterion {n} FAIL  {name}: mission did not run: {e}");
            }
            ok = false;
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

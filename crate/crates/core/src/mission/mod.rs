//! Deterministic mission state machine.
//!
//! Each tick runs, in order: a depth sweep from the UAV (at the sensor
//! rate), map filtering and UGV replanning (at the map-update rate), the
//! behaviour of the current state, and the tether update. The whole run is
//! a pure function of the scenario and its seed.

mod log;
mod state;

pub use log::{Event, LogLine, MissionLog, OutcomeRecord, Summary, TetherSample, TickRecord};
pub use state::{FailureReason, MissionState};

use log::TetherSample as Sample;
use rand_chacha::ChaCha8Rng;

use crate::detect::{detect_anchor, detect_cliff, find_landing_pose, AnchorCandidate, LandingSite};
use crate::gridmap::{GridMap, MapError, ELEVATION, ELEVATION_INPAINTED, TRAVERSABILITY};
use crate::mapfilter::run_pipeline;
use crate::planner::{astar_plan, corridor_altitude, flight_step, integrate_unicycle, pure_pursuit_step, Path};
use crate::pose::Pose6;
use crate::rng::{substream, HOOK_STREAM, SENSOR_STREAM};
use crate::scenario::{Scenario, Setup};
use crate::tether::{circle_trajectory, sample_hook_catch, HookModel, TetherError, TetherState, WindingPlan};
use crate::worldsim::{render_depth_pointcloud, ugv_ground_pose, WorldError, WorldModel};

#[derive(Debug, thiserror::Error)]
pub enum MissionError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Tether(#[from] TetherError),
}

/// One row of an exported path: the waypoints of a plan made at `tick`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRow {
    pub tick: u64,
    pub x: f64,
    pub y: f64,
    /// Cumulative cost (UGV) or cumulative horizontal length (UAV) up to here.
    pub cost: f64,
}

#[derive(Debug, Clone)]
struct Winding {
    plan: WindingPlan,
    next: usize,
    on_circle: bool,
}

#[derive(Debug, Clone, Copy)]
enum LandingPhase {
    Transit,
    Descend,
}

pub struct Mission {
    sc: Scenario,
    world: WorldModel,
    hook: HookModel,
    map: GridMap,
    sensor_rng: ChaCha8Rng,
    hook_rng: ChaCha8Rng,
    tick: u64,
    state: MissionState,
    ugv: Pose6,
    uav: Pose6,
    takeoff_ground: f64,
    uav_altitude: f64,
    tether: TetherState,
    drive_path: Option<Path>,
    search_started: u64,
    anchor: Option<AnchorCandidate>,
    winding: Option<Winding>,
    attempts: u32,
    landing: Option<(LandingSite, LandingPhase)>,
    records: Vec<TickRecord>,
    ugv_paths: Vec<PathRow>,
    uav_paths: Vec<PathRow>,
    outcome: Option<OutcomeRecord>,
}

pub struct MissionRun {
    pub log: MissionLog,
    pub summary: Summary,
    pub map: GridMap,
    pub ugv_paths: Vec<PathRow>,
    pub uav_paths: Vec<PathRow>,
    pub anchor: Option<AnchorCandidate>,
    pub landing: Option<LandingSite>,
    pub world: WorldModel,
}

fn xy(p: &Pose6) -> [f64; 2] {
    [p.x, p.y]
}

fn xyz(p: &Pose6) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn hdist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Mission {
    pub fn new(sc: &Scenario, setup: Setup) -> Result<Self, MissionError> {
        let Setup { world, hook } = setup;
        let s = sc.ugv_start;
        let ugv = ugv_ground_pose(&world, s.x, s.y, s.heading, sc.climb.footprint_radius)?;
        let [ux, uy] = sc.uav_start.unwrap_or([s.x, s.y]);
        let ground = world.sample_height(ux, uy)?;
        let uav = Pose6::new(ux, uy, ground, 0.0, 0.0, s.heading);
        let map = GridMap::covering(world.bounds(), sc.map.resolution)?;
        let tether = TetherState::new(sc.mission.tether_length, xyz(&ugv), xyz(&uav));
        Ok(Self {
            sensor_rng: substream(sc.seed, SENSOR_STREAM),
            hook_rng: substream(sc.seed, HOOK_STREAM),
            sc: sc.clone(),
            world,
            hook,
            map,
            tick: 0,
            state: MissionState::TandemNavigate,
            ugv,
            uav,
            takeoff_ground: ground,
            uav_altitude: ground + sc.flight.clearance,
            tether,
            drive_path: None,
            search_started: 0,
            anchor: None,
            winding: None,
            attempts: 0,
            landing: None,
            records: Vec::new(),
            ugv_paths: Vec::new(),
            uav_paths: Vec::new(),
            outcome: None,
        })
    }

    pub fn state(&self) -> MissionState {
        self.state
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn tether(&self) -> &TetherState {
        &self.tether
    }

    pub fn ugv(&self) -> Pose6 {
        self.ugv
    }

    pub fn uav(&self) -> Pose6 {
        self.uav
    }

    fn time(&self) -> f64 {
        self.tick as f64 * self.sc.dt
    }

    fn transition(&mut self, to: MissionState, events: &mut Vec<Event>) {
        assert!(self.state.can_transition(to), "illegal transition {} -> {}", self.state, to);
        ::log::info!("t={:.1}s {} -> {}", self.time(), self.state, to);
        events.push(Event::StateChanged { from: self.state, to });
        self.state = to;
    }

    /// Advances one tick. Returns the record written for it.
    pub fn step(&mut self) -> Result<&TickRecord, MissionError> {
        assert!(!self.state.is_terminal(), "stepping a finished mission");
        self.tick += 1;
        let mut events = Vec::new();
        let phase = self.tick - 1;
        let sensing = phase.is_multiple_of(self.sc.sensor_period_ticks());
        let map_update = phase.is_multiple_of(self.sc.map_period_ticks());
        let mut integrated = 0;
        if sensing {
            integrated = self.sense()?;
            self.refresh_altitude();
        }
        if map_update {
            let report = run_pipeline(&mut self.map, &self.sc.filter)?;
            for w in &report.warnings {
                ::log::debug!("filter: {w}");
            }
            events.push(Event::MapUpdated {
                integrated,
                filled: report.filled_cells,
                traversable: report.traversable_cells,
            });
        }
        match self.state {
            MissionState::TandemNavigate => self.tandem(map_update, &mut events)?,
            MissionState::CliffConfirmed => {
                self.hover();
                self.transition(MissionState::UavCrossCliff, &mut events);
            }
            MissionState::UavCrossCliff => self.cross_cliff(&mut events),
            MissionState::AnchorSearch => self.anchor_search(map_update, &mut events)?,
            MissionState::WindTether => self.wind(&mut events)?,
            MissionState::LandingSearch => self.land(&mut events)?,
            MissionState::Landed => {
                events.push(Event::WinchEngaged);
                self.transition(MissionState::WinchClimb, &mut events);
            }
            MissionState::WinchClimb => self.climb(&mut events)?,
            MissionState::Done | MissionState::Failed(_) => unreachable!(),
        }
        if !self.tether.anchored {
            self.tether.update(xyz(&self.ugv), Some(xyz(&self.uav)), &self.world);
        } else {
            self.tether.update(xyz(&self.ugv), None, &self.world);
        }
        if !self.state.is_terminal() && self.tick >= self.sc.max_ticks {
            self.transition(MissionState::Failed(FailureReason::Timeout), &mut events);
        }
        let t = &self.tether;
        let record = TickRecord {
            tick: self.tick,
            time: self.time(),
            state: self.state,
            uav: self.uav,
            ugv: self.ugv,
            tether: Sample {
                deployed: t.deployed,
                wound: t.wound(),
                length: t.length(),
                wraps: t.wrap_points().len(),
                wrapped_deg: t.wrapped_angle().to_degrees(),
                anchored: t.anchored,
            },
            on_circle: (self.state == MissionState::WindTether)
                .then(|| self.winding.as_ref().is_some_and(|w| w.on_circle)),
            events,
        };
        self.records.push(record);
        if self.state.is_terminal() {
            self.outcome = Some(OutcomeRecord {
                tick: self.tick,
                time: self.time(),
                outcome: self.state,
            });
        }
        Ok(self.records.last().expect("just pushed"))
    }

    fn sense(&mut self) -> Result<usize, MissionError> {
        let pose = Pose6::new(
            self.uav.x,
            self.uav.y,
            self.uav.z,
            0.0,
            self.sc.mission.sensor_pitch_deg.to_radians(),
            self.uav.yaw,
        );
        let cloud = render_depth_pointcloud(&self.world, &pose, &self.sc.sensor, &mut self.sensor_rng)?;
        Ok(self.map.integrate_pointcloud(&cloud).integrated)
    }

    /// Target altitude toward the current flight goal, refreshed at the
    /// sensor rate.
    fn refresh_altitude(&mut self) {
        let Some(target) = self.flight_goal() else {
            return;
        };
        let p = &self.sc.flight;
        self.uav_altitude = corridor_altitude(&self.map, xy(&self.uav), target, p)
            .map_or(self.takeoff_ground + p.clearance, |h| h + p.clearance);
    }

    /// Horizontal goal of a corridor-following flight state, if any.
    fn flight_goal(&self) -> Option<[f64; 2]> {
        match self.state {
            MissionState::TandemNavigate => Some(self.lead_point()),
            MissionState::CliffConfirmed | MissionState::UavCrossCliff => Some(self.sc.goal),
            MissionState::AnchorSearch => Some(xy(&self.uav)),
            _ => None,
        }
    }

    fn lead_point(&self) -> [f64; 2] {
        let from = xy(&self.ugv);
        let goal = self.sc.goal;
        let d = hdist(from, goal);
        if d <= self.sc.mission.standoff {
            return goal;
        }
        let k = self.sc.mission.standoff / d;
        [from[0] + k * (goal[0] - from[0]), from[1] + k * (goal[1] - from[1])]
    }

    fn fly_to(&mut self, target: [f64; 2], altitude: f64) -> bool {
        let step = flight_step(&self.uav, target, altitude, &self.sc.flight, self.sc.dt);
        self.uav = step.pose;
        step.arrived
    }

    fn hover(&mut self) {
        let here = xy(&self.uav);
        self.fly_to(here, self.uav_altitude);
    }

    fn record_uav_path(&mut self, points: &[[f64; 2]]) {
        let mut acc = 0.0;
        let mut prev = xy(&self.uav);
        for p in points {
            acc += hdist(prev, *p);
            prev = *p;
            self.uav_paths.push(PathRow {
                tick: self.tick,
                x: p[0],
                y: p[1],
                cost: acc,
            });
        }
    }

    fn tandem(&mut self, replan: bool, events: &mut Vec<Event>) -> Result<(), MissionError> {
        let lead = self.lead_point();
        self.fly_to(lead, self.uav_altitude);
        if hdist(xy(&self.ugv), self.sc.goal) <= self.sc.mission.goal_tolerance {
            self.transition(MissionState::Done, events);
            return Ok(());
        }
        if replan && self.map.has_layer(TRAVERSABILITY) {
            if self.replan(events)? {
                self.transition(MissionState::CliffConfirmed, events);
                return Ok(());
            }
            if self.state.is_terminal() {
                return Ok(());
            }
        }
        self.drive();
        Ok(())
    }

    /// Plans to the goal, cuts the plan at the first unknown or
    /// untraversable cell and checks for a cliff up to the last known cell.
    /// A cliff is confirmed once the UGV has reached the end of the drivable
    /// part. Returns whether it was.
    fn replan(&mut self, events: &mut Vec<Event>) -> Result<bool, MissionError> {
        let start = xy(&self.ugv);
        let Some(path) = astar_plan(&self.map, start, self.sc.goal, &self.sc.weights)? else {
            self.drive_path = None;
            self.transition(MissionState::Failed(FailureReason::NoPath), events);
            return Ok(false);
        };
        let trav = self.map.layer(TRAVERSABILITY)?;
        let value = |i: usize| trav[self.map.flat(path.cells[i])];
        let known = (1..path.len()).find(|&i| value(i).is_none()).unwrap_or(path.len());
        let floor = self.sc.mission.traversability_floor;
        let drivable = (1..path.len())
            .find(|&i| value(i).is_none_or(|t| t < floor))
            .unwrap_or(path.len());
        let mut drive = path.clone();
        drive.cells.truncate(drivable);
        drive.waypoints.truncate(drivable);
        events.push(Event::Replanned {
            cells: path.len(),
            cost: path.cost,
            drivable,
        });
        self.record_ugv_path(&drive)?;
        if known >= 2 {
            let goal = path.waypoints[known - 1];
            let report = detect_cliff(&self.map, start, goal, &self.sc.weights, &self.sc.cliff)?;
            events.push(Event::CliffCheck {
                goal,
                cliff: report.cliff,
                best_goal: report.best_goal,
                best_cost: report.best_cost.is_finite().then_some(report.best_cost),
            });
            if report.cliff {
                // Close in on the cliff before handing over to the UAV.
                let at_end = drivable < 2 || hdist(start, drive.waypoints[drivable - 1]) <= self.sc.mission.goal_tolerance;
                self.drive_path = (!at_end).then_some(drive);
                return Ok(at_end);
            }
        }
        self.drive_path = Some(drive);
        Ok(false)
    }

    fn record_ugv_path(&mut self, path: &Path) -> Result<(), MissionError> {
        let field = crate::planner::CostField::new(&self.map, &self.sc.weights)?;
        let mut acc = 0.0;
        for (i, (c, w)) in path.cells.iter().zip(&path.waypoints).enumerate() {
            if i > 0 {
                acc += field.cost(self.map.flat(*c));
            }
            self.ugv_paths.push(PathRow {
                tick: self.tick,
                x: w[0],
                y: w[1],
                cost: acc,
            });
        }
        Ok(())
    }

    fn drive(&mut self) {
        let Some(path) = &self.drive_path else {
            return;
        };
        let cmd = pure_pursuit_step(path, &self.ugv.planar(), &self.sc.pursuit);
        if cmd.done {
            return;
        }
        let next = integrate_unicycle(&self.ugv.planar(), cmd.v, cmd.omega, self.sc.dt);
        let (x, y) = self.world.bounds().clamp(next.x, next.y);
        if let Ok(p) = ugv_ground_pose(&self.world, x, y, next.heading, self.sc.climb.footprint_radius) {
            self.ugv = p;
        }
    }

    fn cross_cliff(&mut self, events: &mut Vec<Event>) {
        let goal = self.sc.goal;
        if self.fly_to(goal, self.uav_altitude) {
            self.search_started = self.tick;
            self.transition(MissionState::AnchorSearch, events);
        }
    }

    fn anchor_search(&mut self, update: bool, events: &mut Vec<Event>) -> Result<(), MissionError> {
        self.hover();
        if update {
            let a = &self.sc.anchor;
            let found = detect_anchor(
                &self.map,
                xy(&self.uav),
                a.search_radius,
                a.peakness_threshold,
                a.neighborhood_radius,
            )?;
            if let Some(cand) = found {
                events.push(Event::AnchorDetected {
                    position: cand.position,
                    elevation: cand.elevation,
                    peakness: cand.peakness,
                });
                self.anchor = Some(cand);
                self.start_winding(events)?;
                self.transition(MissionState::WindTether, events);
                return Ok(());
            }
        }
        let waited = (self.tick - self.search_started) as f64 * self.sc.dt;
        if waited >= self.sc.anchor.timeout {
            self.transition(MissionState::Failed(FailureReason::NoAnchor), events);
        }
        Ok(())
    }

    /// Lowest known elevation around the anchor.
    fn anchor_ground(&self, cand: &AnchorCandidate) -> Result<f64, MissionError> {
        let layer = if self.map.has_layer(ELEVATION_INPAINTED) {
            ELEVATION_INPAINTED
        } else {
            ELEVATION
        };
        let values = self.map.layer(layer)?;
        let offsets = self.map.disc_offsets(cand.radius);
        Ok(self
            .map
            .neighbors_within(values, cand.cell, &offsets)
            .map(|(_, v)| v)
            .fold(cand.elevation, f64::min))
    }

    fn start_winding(&mut self, events: &mut Vec<Event>) -> Result<(), MissionError> {
        let cand = self.anchor.clone().expect("anchor detected");
        let w = &self.sc.winding;
        let altitude = self.anchor_ground(&cand)? + w.altitude_offset;
        let plan = circle_trajectory(
            cand.position,
            0.5 * self.map.resolution(),
            w.flight_radius,
            altitude,
            w.revolution_angle_deg,
            w.step_deg,
            xy(&self.uav),
        )?;
        events.push(Event::WindingStarted {
            attempt: self.attempts + 1,
            start_bearing: plan.start_bearing,
            altitude,
            waypoints: plan.waypoints.len(),
        });
        let pts: Vec<[f64; 2]> = plan.waypoints.iter().map(|p| [p[0], p[1]]).collect();
        self.record_uav_path(&pts);
        self.winding = Some(Winding {
            plan,
            next: 0,
            on_circle: false,
        });
        Ok(())
    }

    fn wind(&mut self, events: &mut Vec<Event>) -> Result<(), MissionError> {
        let w = self.winding.as_ref().expect("winding plan");
        let target = w.plan.waypoints[w.next];
        let arrived = self.fly_to([target[0], target[1]], target[2]);
        let w = self.winding.as_mut().expect("winding plan");
        if arrived {
            w.on_circle = true;
            w.next += 1;
        }
        if w.next < w.plan.waypoints.len() {
            return Ok(());
        }
        self.attempts += 1;
        let rev = self.sc.winding.revolution_angle_deg;
        let caught = sample_hook_catch(&self.hook, rev, &mut self.hook_rng);
        let success = caught && self.tether.wrap.is_some();
        events.push(Event::HookAttempt {
            attempt: self.attempts,
            revolution_deg: rev,
            wrapped_deg: self.tether.wrapped_angle().to_degrees(),
            success,
        });
        if success {
            self.tether.anchor()?;
            self.winding = None;
            self.transition(MissionState::LandingSearch, events);
        } else if self.attempts >= self.sc.winding.max_attempts {
            self.transition(MissionState::Failed(FailureReason::HookFailed), events);
        } else {
            self.start_winding(events)?;
        }
        Ok(())
    }

    fn land(&mut self, events: &mut Vec<Event>) -> Result<(), MissionError> {
        if self.landing.is_none() {
            match find_landing_pose(&self.map, xy(&self.uav), &self.sc.landing)? {
                Some(site) => {
                    events.push(Event::LandingSite {
                        position: site.position,
                        elevation: site.elevation,
                    });
                    self.record_uav_path(&[site.position]);
                    self.landing = Some((site, LandingPhase::Transit));
                }
                None => {
                    self.transition(MissionState::Failed(FailureReason::NoLandingSite), events);
                    return Ok(());
                }
            }
        }
        let (site, phase) = self.landing.expect("landing site");
        match phase {
            LandingPhase::Transit => {
                if self.fly_to(site.position, self.uav.z) {
                    self.landing = Some((site, LandingPhase::Descend));
                }
            }
            LandingPhase::Descend => {
                if self.fly_to(site.position, site.elevation) {
                    self.uav.z = site.elevation;
                    events.push(Event::MotorsOff);
                    self.transition(MissionState::Landed, events);
                }
            }
        }
        Ok(())
    }

    fn climb(&mut self, events: &mut Vec<Event>) -> Result<(), MissionError> {
        let step = self.tether.climb(&self.ugv, &self.world, &self.sc.climb, self.sc.dt)?;
        if step.stalled {
            events.push(Event::ClimbStalled);
            self.transition(MissionState::Failed(FailureReason::Stalled), events);
            return Ok(());
        }
        self.ugv = step.pose;
        if step.climbed {
            events.push(Event::Climbed);
            self.transition(MissionState::Done, events);
        }
        Ok(())
    }

    /// Steps until the mission ends or runs out of ticks.
    pub fn run(mut self) -> Result<MissionRun, MissionError> {
        while !self.state.is_terminal() {
            self.step()?;
        }
        let outcome = self.outcome.clone().expect("terminal state records an outcome");
        let log = MissionLog {
            records: self.records,
            outcome,
        };
        let path_len = |f: fn(&TickRecord) -> Pose6| -> f64 {
            log.records
                .windows(2)
                .map(|w| {
                    let (a, b) = (f(&w[0]), f(&w[1]));
                    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt()
                })
                .sum()
        };
        let summary = Summary {
            name: self.sc.name.clone(),
            seed: self.sc.seed,
            outcome: log.outcome.outcome,
            ticks: log.outcome.tick,
            sim_time: log.outcome.time,
            states: log.state_sequence(),
            ugv_distance: path_len(|r| r.ugv),
            uav_distance: path_len(|r| r.uav),
            ugv_final: xyz(&self.ugv),
            uav_final: xyz(&self.uav),
            anchor: self.anchor.as_ref().map(|a| a.position),
            landing_site: self.landing.map(|(s, _)| s.position),
            hook_attempts: self.attempts,
            tether_total: self.tether.total_length,
            tether_deployed: self.tether.deployed,
            tether_wound: self.tether.wound(),
        };
        Ok(MissionRun {
            log,
            summary,
            map: self.map,
            ugv_paths: self.ugv_paths,
            uav_paths: self.uav_paths,
            anchor: self.anchor,
            landing: self.landing.map(|(s, _)| s),
            world: self.world,
        })
    }
}

/// Builds and runs the mission described by `sc`.
pub fn run(sc: &Scenario, setup: Setup) -> Result<MissionRun, MissionError> {
    Mission::new(sc, setup)?.run()
}

//! Scenario files and run artifacts.
//!
//! A scenario is a single JSON document with an explicit `schema_version`.
//! Every parameter block is optional and falls back to documented defaults;
//! unknown keys are rejected and errors carry the path of the offending
//! field.

mod artifacts;
mod svg;

pub use artifacts::{write_artifacts, write_path_csv, write_trajectory_csv, ArtifactPaths};
pub use svg::render_svg;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{CliffParams, LandingParams};
use crate::mapfilter::FilterParams;
use crate::planner::{FlightParams, PlanWeights, PursuitParams};
use crate::tether::{ClimbParams, HookModel, TetherError, WindingParams};
use crate::worldsim::{BoxObstacle, Bounds, Pole, SensorSpec, TerrainSource, WorldError, WorldModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("at `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("`{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Tether(#[from] TetherError),
}

fn invalid(field: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    pub bounds: Bounds,
    /// Heightfield node spacing, m.
    pub resolution: f64,
    #[serde(default)]
    pub terrain: TerrainSource,
    #[serde(default)]
    pub obstacles: Vec<BoxObstacle>,
    #[serde(default)]
    pub poles: Vec<Pole>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapParams {
    /// Cell size of the shared elevation map, m.
    pub resolution: f64,
}

impl Default for MapParams {
    fn default() -> Self {
        Self { resolution: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnchorParams {
    /// Radius of the scanned region around the UAV, m.
    pub search_radius: f64,
    /// Peakness neighbourhood radius, m.
    pub neighborhood_radius: f64,
    /// Peakness above which a cell is an anchor, 1/m³.
    pub peakness_threshold: f64,
    /// Give up after searching this long, s.
    pub timeout: f64,
}

impl Default for AnchorParams {
    fn default() -> Self {
        Self {
            search_radius: 2.0,
            neighborhood_radius: 0.3,
            peakness_threshold: 1000.0,
            timeout: 20.0,
        }
    }
}

impl AnchorParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("search_radius", self.search_radius),
            ("neighborhood_radius", self.neighborhood_radius),
            ("peakness_threshold", self.peakness_threshold),
            ("timeout", self.timeout),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MissionParams {
    /// Furthest the UAV leads the UGV toward the goal, m.
    pub standoff: f64,
    /// The UGV never drives onto cells with lower traversability.
    pub traversability_floor: f64,
    /// Distance to the goal at which the UGV has arrived, m.
    pub goal_tolerance: f64,
    /// Pitch of the UAV depth sensor, deg; -90 looks straight down.
    pub sensor_pitch_deg: f64,
    /// Period of map filtering and UGV replanning, s.
    pub map_update_period: f64,
    /// Total tether on the winch, m.
    pub tether_length: f64,
}

impl Default for MissionParams {
    fn default() -> Self {
        Self {
            standoff: 1.5,
            traversability_floor: 0.2,
            goal_tolerance: 0.3,
            sensor_pitch_deg: -90.0,
            map_update_period: 1.0,
            tether_length: 30.0,
        }
    }
}

impl MissionParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("standoff", self.standoff),
            ("goal_tolerance", self.goal_tolerance),
            ("map_update_period", self.map_update_period),
            ("tether_length", self.tether_length),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be > 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.traversability_floor) {
            return Err("traversability_floor must be in [0, 1]".into());
        }
        if !(-90.0..=90.0).contains(&self.sensor_pitch_deg) {
            return Err("sensor_pitch_deg must be in [-90, 90]".into());
        }
        Ok(())
    }
}

/// Where the hook-catch table comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HookSource {
    /// The built-in synthetic table.
    #[default]
    Default,
    /// CSV with `bin_start_deg,probability,trials` columns.
    Csv { path: PathBuf },
    Table(HookModel),
}

fn default_dt() -> f64 {
    0.1
}

fn default_max_ticks() -> u64 {
    3000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Simulation step, s.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_max_ticks")]
    pub max_ticks: u64,
    pub world: WorldSpec,
    pub ugv_start: StartPose,
    /// Take-off point of the UAV; defaults to the UGV start.
    #[serde(default)]
    pub uav_start: Option<[f64; 2]>,
    pub goal: [f64; 2],
    #[serde(default)]
    pub map: MapParams,
    #[serde(default)]
    pub sensor: SensorSpec,
    #[serde(default)]
    pub filter: FilterParams,
    #[serde(default)]
    pub weights: PlanWeights,
    #[serde(default)]
    pub pursuit: PursuitParams,
    #[serde(default)]
    pub flight: FlightParams,
    #[serde(default)]
    pub cliff: CliffParams,
    #[serde(default)]
    pub anchor: AnchorParams,
    #[serde(default)]
    pub landing: LandingParams,
    #[serde(default)]
    pub winding: WindingParams,
    #[serde(default)]
    pub hook: HookSource,
    #[serde(default)]
    pub climb: ClimbParams,
    #[serde(default)]
    pub mission: MissionParams,
}

/// Everything a mission needs that is derived from a scenario.
#[derive(Debug, Clone)]
pub struct Setup {
    pub world: WorldModel,
    pub hook: HookModel,
}

impl Scenario {
    /// Parses JSON text. Field paths in errors use dotted notation.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Parse {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    /// Checks every parameter invariant that does not need files.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be > 0"));
        }
        if self.max_ticks == 0 {
            return Err(invalid("max_ticks", "must be >= 1"));
        }
        let b = &self.world.bounds;
        if !(b.width() > 0.0 && b.height() > 0.0) {
            return Err(invalid("world.bounds", "must have positive area"));
        }
        if !(self.world.resolution > 0.0 && self.world.resolution.is_finite()) {
            return Err(invalid("world.resolution", "must be > 0"));
        }
        if !(self.map.resolution > 0.0 && self.map.resolution.is_finite()) {
            return Err(invalid("map.resolution", "must be > 0"));
        }
        let inside = |p: [f64; 2]| b.contains(p[0], p[1]);
        if !inside([self.ugv_start.x, self.ugv_start.y]) {
            return Err(invalid("ugv_start", "outside world bounds"));
        }
        if let Some(p) = self.uav_start {
            if !inside(p) {
                return Err(invalid("uav_start", "outside world bounds"));
            }
        }
        if !inside(self.goal) {
            return Err(invalid("goal", "outside world bounds"));
        }
        let blocks: [(&str, Result<(), String>); 11] = [
            ("sensor", self.sensor.validate()),
            ("filter", self.filter.validate()),
            ("weights", self.weights.validate()),
            ("pursuit", self.pursuit.validate()),
            ("flight", self.flight.validate()),
            ("cliff", self.cliff.validate()),
            ("anchor", self.anchor.validate()),
            ("landing", self.landing.validate()),
            ("winding", self.winding.validate()),
            ("climb", self.climb.validate()),
            ("mission", self.mission.validate()),
        ];
        for (field, r) in blocks {
            r.map_err(|reason| invalid(field, reason))?;
        }
        if let HookSource::Table(m) = &self.hook {
            m.validate().map_err(|e| invalid("hook", e.to_string()))?;
        }
        Ok(())
    }

    /// Builds the ground-truth world and hook table, resolving relative file
    /// paths against `base_dir`, and checks the checks that need them.
    pub fn build(&self, base_dir: &Path) -> Result<Setup, ScenarioError> {
        self.validate()?;
        let w = &self.world;
        let hf = w.terrain.build(&w.bounds, w.resolution, base_dir)?;
        let world = WorldModel::new(w.bounds, hf, w.obstacles.clone(), w.poles.clone())?;
        let top = w
            .obstacles
            .iter()
            .map(|o| o.top())
            .chain(w.poles.iter().map(|p| p.top()))
            .fold(world.heightfield().max_height(), f64::max);
        let span = top - world.heightfield().min_height();
        let bound = self.weights.max_known_cost(span);
        if !(self.weights.unknown > bound) {
            return Err(invalid(
                "weights.unknown",
                format!("must exceed the largest known-cell cost {bound} for this world"),
            ));
        }
        let hook = match &self.hook {
            HookSource::Default => HookModel::default(),
            HookSource::Table(m) => m.clone(),
            HookSource::Csv { path } => {
                let p = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                HookModel::from_csv(&p)?
            }
        };
        Ok(Setup { world, hook })
    }

    /// Ticks between sensor sweeps.
    pub fn sensor_period_ticks(&self) -> u64 {
        ((1.0 / (self.sensor.rate * self.dt)).round() as u64).max(1)
    }

    /// Ticks between map updates.
    pub fn map_period_ticks(&self) -> u64 {
        ((self.mission.map_update_period / self.dt).round() as u64).max(1)
    }
}

/// Reads, parses and fully validates a scenario file, including referenced
/// files.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let s = Scenario::from_json(&text)?;
    s.build(base_dir(path))?;
    Ok(s)
}

/// Directory that relative paths in the scenario at `path` resolve against.
pub fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

pub fn save_scenario(s: &Scenario, path: &Path) -> Result<(), ScenarioError> {
    std::fs::write(path, s.to_json()).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

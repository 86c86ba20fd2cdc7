use std::io::Write;

use serde::{Deserialize, Serialize};

use super::state::MissionState;
use crate::pose::Pose6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    StateChanged {
        from: MissionState,
        to: MissionState,
    },
    MapUpdated {
        integrated: usize,
        filled: usize,
        traversable: usize,
    },
    Replanned {
        cells: usize,
        cost: f64,
        /// Cells kept after cutting the path at unknown or untraversable cells.
        drivable: usize,
    },
    CliffCheck {
        goal: [f64; 2],
        cliff: bool,
        best_goal: [f64; 2],
        /// `None` when no perturbed goal was reachable.
        best_cost: Option<f64>,
    },
    AnchorDetected {
        position: [f64; 2],
        elevation: f64,
        peakness: f64,
    },
    WindingStarted {
        attempt: u32,
        start_bearing: f64,
        altitude: f64,
        waypoints: usize,
    },
    HookAttempt {
        attempt: u32,
        revolution_deg: f64,
        wrapped_deg: f64,
        success: bool,
    },
    LandingSite {
        position: [f64; 2],
        elevation: f64,
    },
    MotorsOff,
    WinchEngaged,
    ClimbStalled,
    Climbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetherSample {
    pub deployed: f64,
    pub wound: f64,
    pub length: f64,
    pub wraps: usize,
    pub wrapped_deg: f64,
    pub anchored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub time: f64,
    pub state: MissionState,
    pub uav: Pose6,
    pub ugv: Pose6,
    pub tether: TetherSample,
    /// Set while winding: `false` on the approach to the circle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_circle: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub tick: u64,
    pub time: f64,
    pub outcome: MissionState,
}

/// One line of the line-delimited log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogLine {
    Tick(TickRecord),
    Outcome(OutcomeRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionLog {
    pub records: Vec<TickRecord>,
    pub outcome: OutcomeRecord,
}

impl MissionLog {
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, &LogLine::Tick(r.clone()))?;
            w.write_all(b"\n")?;
        }
        serde_json::to_writer(&mut w, &LogLine::Outcome(self.outcome.clone()))?;
        w.write_all(b"\n")
    }

    pub fn to_ndjson(&self) -> String {
        let mut buf = Vec::new();
        self.write_ndjson(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn from_ndjson(text: &str) -> Result<Self, String> {
        let mut records = Vec::new();
        let mut outcome = None;
        for (i, line) in text.lines().enumerate() {
            if outcome.is_some() {
                return Err(format!("line {}: record after the outcome", i + 1));
            }
            match serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))? {
                LogLine::Tick(r) => records.push(r),
                LogLine::Outcome(o) => outcome = Some(o),
            }
        }
        let outcome = outcome.ok_or("missing outcome record")?;
        Ok(Self { records, outcome })
    }

    /// Distinct states in the order they were first entered.
    pub fn state_sequence(&self) -> Vec<MissionState> {
        let mut out: Vec<MissionState> = Vec::new();
        for r in &self.records {
            if out.last() != Some(&r.state) {
                out.push(r.state);
            }
        }
        out
    }

    pub fn events(&self) -> impl Iterator<Item = (u64, &Event)> {
        self.records.iter().flat_map(|r| r.events.iter().map(move |e| (r.tick, e)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub seed: u64,
    pub outcome: MissionState,
    pub ticks: u64,
    pub sim_time: f64,
    pub states: Vec<MissionState>,
    pub ugv_distance: f64,
    pub uav_distance: f64,
    pub ugv_final: [f64; 3],
    pub uav_final: [f64; 3],
    pub anchor: Option<[f64; 2]>,
    pub landing_site: Option<[f64; 2]>,
    pub hook_attempts: u32,
    pub tether_total: f64,
    pub tether_deployed: f64,
    pub tether_wound: f64,
}

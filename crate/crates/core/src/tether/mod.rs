//! Tether geometry, the winding manoeuvre, the hook-catch model and winch
//! climbing.
//!
//! The tether is a taut polyline from the UGV winch. While the UAV carries
//! the free end, the line may wrap around a pole; contact with the pole is
//! kept as an arc of points on the pole surface at a fixed height. After the
//! hook catches, the UAV end is released and the polyline ends at the last
//! wrap point.

mod climb;
mod hook;
mod winding;

pub use climb::{winch_climb_step, ClimbParams, ClimbStep};
pub use hook::{sample_hook_catch, HookModel, BIN_COUNT, BIN_WIDTH_DEG};
pub use winding::{circle_trajectory, WindingParams, WindingPlan};

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pose::{normalize_angle, Pose6};
use crate::worldsim::{Pole, WorldError, WorldModel};

/// Largest angle between consecutive wrap points, rad.
const ARC_STEP: f64 = PI / 18.0;

#[derive(Debug, Error)]
pub enum TetherError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("hook model: {0}")]
    Hook(String),
    #[error("tether is not wrapped around a pole")]
    NotWrapped,
    #[error("tether is not anchored")]
    NotAnchored,
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Contact of the line with one pole. Angles are unwrapped (continuous) and
/// measured counter-clockwise from +x around the pole axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wrap {
    pub pole: usize,
    /// +1 when the line runs counter-clockwise around the pole from the UGV
    /// side, -1 otherwise.
    pub side: f64,
    /// Angle where the line from the UGV first touches the pole.
    pub start_angle: f64,
    /// Angle where the line leaves the pole toward the UAV.
    pub end_angle: f64,
    /// Height of the contact, m.
    pub z: f64,
}

impl Wrap {
    /// Angle subtended by the contact arc, rad.
    pub fn span(&self) -> f64 {
        self.side * (self.end_angle - self.start_angle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetherState {
    pub total_length: f64,
    pub deployed: f64,
    pub ugv: [f64; 3],
    /// Free end carried by the UAV; `None` once anchored.
    pub uav: Option<[f64; 3]>,
    pub wrap: Option<Wrap>,
    pub anchored: bool,
    wrap_points: Vec<[f64; 3]>,
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn polyline_length(points: &[[f64; 3]]) -> f64 {
    points.windows(2).map(|w| dist3(w[0], w[1])).sum()
}

/// Representation of `angle` (mod 2π) closest to `reference`.
fn nearest_turn(angle: f64, reference: f64) -> f64 {
    reference + normalize_angle(angle - reference)
}

/// Polar angle of `p` about `c` and the half-angle between the two tangent
/// points seen from `p`. `None` inside the circle.
fn tangent_geometry(c: [f64; 2], r: f64, p: [f64; 3]) -> Option<(f64, f64)> {
    let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
    let d = dx.hypot(dy);
    (d > r).then(|| (dy.atan2(dx), (r / d).acos()))
}

/// Where the straight segment `a`→`b` meets `pole`, as the height of the line
/// at its closest horizontal approach to the axis.
fn segment_hits_pole(pole: &Pole, a: [f64; 3], b: [f64; 3]) -> Option<f64> {
    let c = pole.center;
    if pole.covers(a[0], a[1]) || pole.covers(b[0], b[1]) {
        return None;
    }
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return None;
    }
    let t = (((c[0] - a[0]) * dx + (c[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    let (px, py) = (a[0] + t * dx, a[1] + t * dy);
    if (px - c[0]).hypot(py - c[1]) >= pole.radius {
        return None;
    }
    let z = a[2] + t * (b[2] - a[2]);
    (z >= pole.base && z <= pole.top()).then_some(z)
}

impl TetherState {
    pub fn new(total_length: f64, ugv: [f64; 3], uav: [f64; 3]) -> Self {
        let mut s = Self {
            total_length,
            deployed: 0.0,
            ugv,
            uav: Some(uav),
            wrap: None,
            anchored: false,
            wrap_points: Vec::new(),
        };
        s.deployed = s.length();
        s
    }

    pub fn wound(&self) -> f64 {
        self.total_length - self.deployed
    }

    /// `[ugv, wrap points..., uav]`, the UAV end omitted once anchored.
    pub fn polyline(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::with_capacity(self.wrap_points.len() + 2);
        out.push(self.ugv);
        out.extend_from_slice(&self.wrap_points);
        out.extend(self.uav);
        out
    }

    pub fn wrap_points(&self) -> &[[f64; 3]] {
        &self.wrap_points
    }

    /// Taut length of the polyline, m.
    pub fn length(&self) -> f64 {
        polyline_length(&self.polyline())
    }

    /// Length of the line in contact with the pole, m.
    pub fn wrapped_length(&self) -> f64 {
        polyline_length(&self.wrap_points)
    }

    /// Angle subtended by the contact arc, rad. Zero when unwrapped.
    pub fn wrapped_angle(&self) -> f64 {
        self.wrap.map_or(0.0, |w| w.span())
    }

    /// More line is deployed than exists.
    pub fn exhausted(&self) -> bool {
        self.deployed > self.total_length
    }

    /// First contact point on the pole, seen from the UGV.
    pub fn anchor_point(&self) -> Option<[f64; 3]> {
        self.wrap_points.first().copied()
    }

    /// Moves the endpoints and updates wrap contact against the world's
    /// poles. Once anchored only the UGV end moves.
    pub fn update(&mut self, ugv: [f64; 3], uav: Option<[f64; 3]>, world: &WorldModel) {
        let previous_uav = self.uav;
        self.ugv = ugv;
        if !self.anchored {
            self.uav = uav;
            if let Some(b) = uav {
                self.update_wrap(previous_uav, b, world);
            }
        }
        self.deployed = self.deployed.max(self.length());
    }

    fn update_wrap(&mut self, previous: Option<[f64; 3]>, b: [f64; 3], world: &WorldModel) {
        let a = self.ugv;
        if let Some(mut w) = self.wrap {
            let pole = world.poles()[w.pole];
            if let Some((phi, beta)) = tangent_geometry(pole.center, pole.radius, a) {
                w.start_angle = nearest_turn(phi + w.side * beta, w.start_angle);
            }
            if let Some((phi, beta)) = tangent_geometry(pole.center, pole.radius, b) {
                w.end_angle = nearest_turn(phi - w.side * beta, w.end_angle);
            }
            if w.span() < 0.0 {
                self.wrap = None;
                self.wrap_points.clear();
            } else {
                self.wrap = Some(w);
                self.wrap_points = arc_points(&pole, &w);
                return;
            }
        }
        for (i, pole) in world.poles().iter().enumerate() {
            let Some(z) = segment_hits_pole(pole, a, b) else {
                continue;
            };
            let c = pole.center;
            let reference = previous.unwrap_or(b);
            let cross = (c[0] - a[0]) * (reference[1] - a[1]) - (c[1] - a[1]) * (reference[0] - a[0]);
            let side = if cross > 0.0 { -1.0 } else { 1.0 };
            let (Some((pa, ba)), Some((pb, bb))) = (
                tangent_geometry(c, pole.radius, a),
                tangent_geometry(c, pole.radius, b),
            ) else {
                continue;
            };
            let start = pa + side * ba;
            let w = Wrap {
                pole: i,
                side,
                start_angle: start,
                end_angle: nearest_turn(pb - side * bb, start),
                z,
            };
            if w.span() >= 0.0 {
                self.wrap_points = arc_points(pole, &w);
                self.wrap = Some(w);
                return;
            }
        }
    }

    /// Releases the UAV end, fixing the current wrap.
    pub fn anchor(&mut self) -> Result<(), TetherError> {
        if self.wrap.is_none() {
            return Err(TetherError::NotWrapped);
        }
        self.anchored = true;
        self.uav = None;
        Ok(())
    }

    /// Winds in for `dt` and moves the UGV accordingly. The UGV is pulled
    /// toward the first contact point.
    pub fn climb(
        &mut self,
        ugv: &Pose6,
        world: &WorldModel,
        p: &ClimbParams,
        dt: f64,
    ) -> Result<ClimbStep, TetherError> {
        if !self.anchored {
            return Err(TetherError::NotAnchored);
        }
        let anchor = self.anchor_point().ok_or(TetherError::NotWrapped)?;
        let fixed = self.wrapped_length();
        let step = winch_climb_step(ugv, anchor, world, self.deployed - fixed, p, dt)?;
        if !step.stalled {
            self.deployed = fixed + step.free_length;
            self.ugv = [step.pose.x, step.pose.y, step.pose.z];
        }
        Ok(step)
    }
}

fn arc_points(pole: &Pole, w: &Wrap) -> Vec<[f64; 3]> {
    let span = w.end_angle - w.start_angle;
    let n = ((span.abs() / ARC_STEP).ceil() as usize).max(1);
    (0..=n)
        .map(|k| {
            let a = w.start_angle + span * k as f64 / n as f64;
            let (s, c) = a.sin_cos();
            [pole.center[0] + pole.radius * c, pole.center[1] + pole.radius * s, w.z]
        })
        .collect()
}

/// Functional form of [`TetherState::update`].
pub fn update_tether(t: &TetherState, ugv: [f64; 3], uav: Option<[f64; 3]>, world: &WorldModel) -> TetherState {
    let mut next = t.clone();
    next.update(ugv, uav, world);
    next
}

/// Number of full turns in `angle` rad.
pub fn turns(angle: f64) -> f64 {
    angle / TAU
}

use serde::{Deserialize, Serialize};

use crate::gridmap::{GridMap, ELEVATION};
use crate::pose::Pose6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlightParams {
    /// Horizontal speed, m/s.
    pub speed: f64,
    /// Maximum climb or sink rate, m/s.
    pub vertical_speed: f64,
    /// Height kept above the highest known terrain in the corridor, m.
    pub clearance: f64,
    /// Half width of the look-ahead corridor, m.
    pub corridor_half_width: f64,
    /// Length of the look-ahead corridor, m.
    pub corridor_length: f64,
    /// Horizontal motion is held while the UAV is further below its target
    /// altitude than this, m.
    pub altitude_tolerance: f64,
    /// Distance at which a horizontal target counts as reached, m.
    pub arrival_radius: f64,
}

impl Default for FlightParams {
    fn default() -> Self {
        Self {
            speed: 0.5,
            vertical_speed: 0.5,
            clearance: 2.0,
            corridor_half_width: 0.3,
            corridor_length: 1.5,
            altitude_tolerance: 0.05,
            arrival_radius: 0.05,
        }
    }
}

impl FlightParams {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("speed", self.speed),
            ("vertical_speed", self.vertical_speed),
            ("corridor_half_width", self.corridor_half_width),
            ("corridor_length", self.corridor_length),
            ("altitude_tolerance", self.altitude_tolerance),
            ("arrival_radius", self.arrival_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be > 0"));
            }
        }
        if !(self.clearance >= 0.0 && self.clearance.is_finite()) {
            return Err("clearance must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightStep {
    pub pose: Pose6,
    pub arrived: bool,
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Highest terrain the UAV has to clear when flying from `from` toward
/// `target`, looking `p.corridor_length` ahead. Unknown cells inside the
/// corridor count as the highest elevation known anywhere on the map.
/// `None` when nothing is known yet.
pub fn corridor_altitude(map: &GridMap, from: [f64; 2], target: [f64; 2], p: &FlightParams) -> Option<f64> {
    let elev = map.layer(ELEVATION).ok()?;
    let global = elev.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if !global.is_finite() {
        return None;
    }
    let (dx, dy) = (target[0] - from[0], target[1] - from[1]);
    let d = dx.hypot(dy);
    let end = if d > p.corridor_length {
        let k = p.corridor_length / d;
        [from[0] + k * dx, from[1] + k * dy]
    } else {
        target
    };
    let res = map.resolution();
    let reach = p.corridor_half_width + 0.5 * res * std::f64::consts::SQRT_2;
    let bounds = map.bounds();
    let lo_x = from[0].min(end[0]) - reach;
    let hi_x = from[0].max(end[0]) + reach;
    let lo_y = from[1].min(end[1]) - reach;
    let hi_y = from[1].max(end[1]) + reach;
    let origin = map.origin();
    let col = |x: f64| ((x - origin[0]) / res).round();
    let row = |y: f64| ((y - origin[1]) / res).round();
    let c0 = col(lo_x.max(bounds.min[0])).max(0.0) as usize;
    let c1 = (col(hi_x.min(bounds.max[0])) as usize).min(map.cols() - 1);
    let r0 = row(lo_y.max(bounds.min[1])).max(0.0) as usize;
    let r1 = (row(hi_y.min(bounds.max[1])) as usize).min(map.rows() - 1);
    let mut best = f64::NEG_INFINITY;
    for r in r0..=r1 {
        for c in c0..=c1 {
            let idx = crate::gridmap::CellIndex::new(r, c);
            let centre = map.center(idx);
            if segment_distance([centre.x, centre.y], from, end) > reach {
                continue;
            }
            best = best.max(elev[map.flat(idx)].unwrap_or(global));
        }
    }
    Some(if best.is_finite() { best } else { global })
}

/// Moves the UAV toward `target` for `dt`: altitude first, then horizontal
/// straight-line motion while holding `altitude`.
pub fn flight_step(pose: &Pose6, target: [f64; 2], altitude: f64, p: &FlightParams, dt: f64) -> FlightStep {
    let dz = altitude - pose.z;
    let z = pose.z + dz.clamp(-p.vertical_speed * dt, p.vertical_speed * dt);
    let (dx, dy) = (target[0] - pose.x, target[1] - pose.y);
    let d = dx.hypot(dy);
    let mut next = Pose6::new(pose.x, pose.y, z, 0.0, 0.0, pose.yaw);
    if dz <= p.altitude_tolerance && d > 0.0 {
        let step = (p.speed * dt).min(d);
        next.x += dx / d * step;
        next.y += dy / d * step;
        next.yaw = dy.atan2(dx);
    }
    let remaining = (target[0] - next.x).hypot(target[1] - next.y);
    FlightStep {
        pose: next,
        arrived: remaining <= p.arrival_radius && (altitude - next.z).abs() <= p.altitude_tolerance,
    }
}

/// Corridor-based altitude selection followed by one flight step.
pub fn uav_goto_step(map: &GridMap, pose: &Pose6, target: [f64; 2], p: &FlightParams, dt: f64) -> FlightStep {
    let altitude = corridor_altitude(map, [pose.x, pose.y], target, p).map_or(pose.z, |h| h + p.clearance);
    flight_step(pose, target, altitude, p, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::CellIndex;

    fn map(f: impl Fn(f64) -> Option<f64>) -> GridMap {
        let mut m = GridMap::new([0.05, 0.05], 0.1, 20, 60).unwrap();
        for idx in m.indices().collect::<Vec<_>>() {
            let x = m.center(idx).x;
            m.set(ELEVATION, idx, f(x)).unwrap();
        }
        m
    }

    #[test]
    fn flat_terrain_holds_clearance() {
        let m = map(|_| Some(0.0));
        let p = FlightParams::default();
        let mut pose = Pose6::new(0.5, 1.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..200 {
            pose = uav_goto_step(&m, &pose, [5.5, 1.0], &p, 0.1).pose;
            if pose.x > 0.6 {
                assert!((pose.z - p.clearance).abs() < 1e-9);
            }
        }
        assert!((pose.x - 5.5).abs() < 1e-9);
    }

    #[test]
    fn climbs_before_step() {
        let m = map(|x| Some(if x > 3.0 { 1.0 } else { 0.0 }));
        let p = FlightParams::default();
        let mut pose = Pose6::new(0.5, 1.0, p.clearance, 0.0, 0.0, 0.0);
        for _ in 0..300 {
            pose = uav_goto_step(&m, &pose, [5.5, 1.0], &p, 0.1).pose;
            if pose.x >= 3.0 {
                assert!(pose.z >= 1.0 + p.clearance - p.altitude_tolerance, "{pose:?}");
            }
        }
        assert!((pose.z - 3.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_cells_use_known_maximum() {
        let mut m = map(|x| if x > 3.0 { None } else { Some(0.0) });
        m.set(ELEVATION, CellIndex::new(19, 0), Some(0.7)).unwrap();
        let p = FlightParams::default();
        let h = corridor_altitude(&m, [2.5, 1.0], [5.0, 1.0], &p).unwrap();
        assert_eq!(h, 0.7);
        assert_eq!(corridor_altitude(&m, [0.5, 1.0], [1.0, 1.0], &p).unwrap(), 0.0);
    }

    #[test]
    fn empty_map_holds_altitude() {
        let m = map(|_| None);
        let p = FlightParams::default();
        let pose = Pose6::new(0.5, 1.0, 1.2, 0.0, 0.0, 0.0);
        let next = uav_goto_step(&m, &pose, [5.0, 1.0], &p, 0.1).pose;
        assert_eq!(next.z, 1.2);
        assert!(next.x > 0.5);
    }
}

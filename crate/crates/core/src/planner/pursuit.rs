use serde::{Deserialize, Serialize};

use super::astar::Path;
use crate::pose::{normalize_angle, Pose2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PursuitParams {
    /// m
    pub lookahead: f64,
    /// m/s
    pub speed: f64,
    /// rad/s
    pub max_angular_rate: f64,
}

impl Default for PursuitParams {
    fn default() -> Self {
        Self {
            lookahead: 0.4,
            speed: 0.3,
            max_angular_rate: 1.5,
        }
    }
}

impl PursuitParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.lookahead > 0.0 && self.lookahead.is_finite()) {
            return Err("lookahead must be > 0".into());
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return Err("speed must be >= 0".into());
        }
        if !(self.max_angular_rate > 0.0) {
            return Err("max angular rate must be > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PursuitCommand {
    pub v: f64,
    pub omega: f64,
    pub done: bool,
}

impl PursuitCommand {
    pub const STOP: Self = Self {
        v: 0.0,
        omega: 0.0,
        done: true,
    };
}

fn dist(a: [f64; 2], x: f64, y: f64) -> f64 {
    (a[0] - x).hypot(a[1] - y)
}

/// One pure-pursuit control step toward `path`.
pub fn pure_pursuit_step(path: &Path, pose: &Pose2, p: &PursuitParams) -> PursuitCommand {
    pursue(&path.waypoints, pose, p)
}

pub(crate) fn pursue(waypoints: &[[f64; 2]], pose: &Pose2, p: &PursuitParams) -> PursuitCommand {
    let Some(last) = waypoints.last() else {
        return PursuitCommand::STOP;
    };
    if dist(*last, pose.x, pose.y) < 0.5 * p.lookahead {
        return PursuitCommand::STOP;
    }
    let mut nearest = 0;
    let mut best = f64::INFINITY;
    for (i, w) in waypoints.iter().enumerate() {
        let d = dist(*w, pose.x, pose.y);
        if d < best {
            best = d;
            nearest = i;
        }
    }
    let target = waypoints[nearest..]
        .iter()
        .find(|w| dist(**w, pose.x, pose.y) >= p.lookahead)
        .unwrap_or(last);
    let alpha = normalize_angle((target[1] - pose.y).atan2(target[0] - pose.x) - pose.heading);
    let omega = (2.0 * p.speed * alpha.sin() / p.lookahead).clamp(-p.max_angular_rate, p.max_angular_rate);
    PursuitCommand {
        v: p.speed,
        omega,
        done: false,
    }
}

/// Integrates unicycle kinematics over `dt` with an exact arc.
pub fn integrate_unicycle(pose: &Pose2, v: f64, omega: f64, dt: f64) -> Pose2 {
    let heading = pose.heading + omega * dt;
    let (dx, dy) = if omega.abs() < 1e-12 {
        (v * dt * pose.heading.cos(), v * dt * pose.heading.sin())
    } else {
        let r = v / omega;
        (
            r * (heading.sin() - pose.heading.sin()),
            -r * (heading.cos() - pose.heading.cos()),
        )
    };
    Pose2::new(pose.x + dx, pose.y + dy, normalize_angle(heading))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
        points.to_vec()
    }

    fn params() -> PursuitParams {
        PursuitParams {
            lookahead: 0.5,
            speed: 0.4,
            max_angular_rate: 100.0,
        }
    }

    #[test]
    fn aligned_pose_goes_straight() {
        let wp: Vec<_> = (0..20).map(|i| [i as f64 * 0.1, 0.0]).collect();
        let cmd = pursue(&wp, &Pose2::new(0.0, 0.0, 0.0), &params());
        assert_eq!(cmd.omega, 0.0);
        assert_eq!(cmd.v, 0.4);
        assert!(!cmd.done);
    }

    #[test]
    fn target_to_the_left() {
        let p = params();
        let cmd = pursue(&path(&[[0.0, 0.0], [0.0, 1.0]]), &Pose2::new(0.0, 0.0, 0.0), &p);
        assert!((cmd.omega - 2.0 * p.speed / p.lookahead).abs() < 1e-12);
    }

    #[test]
    fn clamps_turn_rate() {
        let p = PursuitParams {
            max_angular_rate: 0.3,
            ..params()
        };
        let cmd = pursue(&path(&[[0.0, 0.0], [0.0, -1.0]]), &Pose2::new(0.0, 0.0, 0.0), &p);
        assert_eq!(cmd.omega, -0.3);
    }

    #[test]
    fn done_near_goal() {
        let cmd = pursue(&path(&[[0.0, 0.0], [1.0, 0.0]]), &Pose2::new(0.8, 0.0, 0.0), &params());
        assert_eq!(cmd, PursuitCommand::STOP);
    }

    #[test]
    fn unicycle_arc_closes() {
        let mut pose = Pose2::new(0.0, 0.0, 0.0);
        let n = 1000;
        let omega = 1.0;
        let dt = 2.0 * std::f64::consts::PI / omega / n as f64;
        for _ in 0..n {
            pose = integrate_unicycle(&pose, 1.0, omega, dt);
        }
        assert!(pose.x.abs() < 1e-9 && pose.y.abs() < 1e-9);
    }
}

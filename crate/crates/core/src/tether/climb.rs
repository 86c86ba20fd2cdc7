use serde::{Deserialize, Serialize};

use super::TetherError;
use crate::pose::Pose6;
use crate::worldsim::{ugv_ground_pose, WorldModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClimbParams {
    /// Winch take-up rate, m/s.
    pub wind_rate: f64,
    /// Climb ends when the UGV is horizontally this close to the anchor, m.
    pub footprint_radius: f64,
}

impl Default for ClimbParams {
    fn default() -> Self {
        Self {
            wind_rate: 0.2,
            footprint_radius: 0.2,
        }
    }
}

impl ClimbParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.wind_rate > 0.0 && self.wind_rate.is_finite()) {
            return Err("wind_rate must be > 0".into());
        }
        if !(self.footprint_radius > 0.0 && self.footprint_radius.is_finite()) {
            return Err("footprint_radius must be > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClimbStep {
    pub pose: Pose6,
    /// Line between the UGV and the anchor after the step, m.
    pub free_length: f64,
    pub climbed: bool,
    /// The shortened line cannot be satisfied anywhere toward the anchor.
    pub stalled: bool,
}

/// Quasi-static winch step. The free line shortens by `wind_rate * dt` and
/// the UGV moves along the terrain toward the anchor's ground projection by
/// the least amount that keeps it within the shortened line.
pub fn winch_climb_step(
    ugv: &Pose6,
    anchor: [f64; 3],
    world: &WorldModel,
    free_length: f64,
    p: &ClimbParams,
    dt: f64,
) -> Result<ClimbStep, TetherError> {
    let (dx, dy) = (anchor[0] - ugv.x, anchor[1] - ugv.y);
    let d = dx.hypot(dy);
    if d < p.footprint_radius {
        return Ok(ClimbStep {
            pose: *ugv,
            free_length,
            climbed: true,
            stalled: false,
        });
    }
    let target = (free_length - p.wind_rate * dt).max(0.0);
    let (ux, uy) = (dx / d, dy / d);
    let excess = |s: f64| -> Result<f64, TetherError> {
        let (x, y) = (ugv.x + s * ux, ugv.y + s * uy);
        let z = world.sample_height(x, y)?;
        Ok((x - anchor[0]).hypot(y - anchor[1]).hypot(z - anchor[2]) - target)
    };
    let mut s = None;
    if excess(0.0)? <= 0.0 {
        s = Some(0.0);
    } else {
        let h = 0.25 * world.heightfield().resolution();
        let mut lo = 0.0;
        let mut k = 1;
        loop {
            let hi = (k as f64 * h).min(d);
            if excess(hi)? <= 0.0 {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if excess(m)? <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                s = Some(b);
                break;
            }
            if hi >= d {
                break;
            }
            lo = hi;
            k += 1;
        }
    }
    let Some(s) = s else {
        return Ok(ClimbStep {
            pose: *ugv,
            free_length,
            climbed: false,
            stalled: true,
        });
    };
    let heading = if s > 0.0 { dy.atan2(dx) } else { ugv.yaw };
    let pose = ugv_ground_pose(world, ugv.x + s * ux, ugv.y + s * uy, heading, p.footprint_radius)?;
    let remaining = (anchor[0] - pose.x).hypot(anchor[1] - pose.y);
    Ok(ClimbStep {
        pose,
        free_length: target,
        climbed: remaining < p.footprint_radius,
        stalled: false,
    })
}

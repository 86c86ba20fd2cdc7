use serde::{Deserialize, Serialize};

use super::TetherError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindingParams {
    /// Horizontal distance from the pole axis flown while winding, m.
    pub flight_radius: f64,
    /// Extra sweep after one full revolution, deg.
    pub revolution_angle_deg: f64,
    /// Angular spacing of the circle waypoints, deg.
    pub step_deg: f64,
    /// Winding altitude above the lowest cell around the anchor, m.
    pub altitude_offset: f64,
    /// Hook attempts before giving up.
    pub max_attempts: u32,
}

impl Default for WindingParams {
    fn default() -> Self {
        Self {
            flight_radius: 0.6,
            revolution_angle_deg: 180.0,
            step_deg: 10.0,
            altitude_offset: 0.5,
            max_attempts: 3,
        }
    }
}

impl WindingParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.flight_radius > 0.0 && self.flight_radius.is_finite()) {
            return Err("flight_radius must be > 0".into());
        }
        if !(0.0..360.0).contains(&self.revolution_angle_deg) {
            return Err("revolution_angle_deg must be in [0, 360)".into());
        }
        if !(self.step_deg > 0.0 && self.step_deg <= 180.0) {
            return Err("step_deg must be in (0, 180]".into());
        }
        if !(self.altitude_offset > 0.0 && self.altitude_offset.is_finite()) {
            return Err("altitude_offset must be > 0".into());
        }
        if self.max_attempts < 1 {
            return Err("max_attempts must be >= 1".into());
        }
        Ok(())
    }
}

/// Counter-clockwise circle around a pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingPlan {
    pub center: [f64; 2],
    pub flight_radius: f64,
    pub altitude: f64,
    pub revolution_angle_deg: f64,
    /// Bearing of the first waypoint from the pole centre, rad.
    pub start_bearing: f64,
    pub waypoints: Vec<[f64; 3]>,
}

impl WindingPlan {
    pub fn total_sweep(&self) -> f64 {
        (360.0 + self.revolution_angle_deg).to_radians()
    }

    pub fn end_bearing(&self) -> f64 {
        self.start_bearing + self.total_sweep()
    }
}

/// Circle waypoints starting where the ray from `uav` to the pole centre
/// meets the flight circle and sweeping `360° + revolution_angle_deg`.
#[allow(clippy::too_many_arguments)]
pub fn circle_trajectory(
    center: [f64; 2],
    pole_radius: f64,
    flight_radius: f64,
    altitude: f64,
    revolution_angle_deg: f64,
    step_deg: f64,
    uav: [f64; 2],
) -> Result<WindingPlan, TetherError> {
    if !(flight_radius > pole_radius) {
        return Err(TetherError::Geometry(format!(
            "flight radius {flight_radius} must exceed pole radius {pole_radius}"
        )));
    }
    if !(step_deg > 0.0) {
        return Err(TetherError::Geometry(format!("step must be > 0, got {step_deg}")));
    }
    let start = if uav == center {
        0.0
    } else {
        (uav[1] - center[1]).atan2(uav[0] - center[0])
    };
    let total = 360.0 + revolution_angle_deg;
    let n = (total / step_deg).ceil() as usize + 1;
    let waypoints = (0..n)
        .map(|k| {
            let a = start + (k as f64 * step_deg).min(total).to_radians();
            let (s, c) = a.sin_cos();
            [center[0] + flight_radius * c, center[1] + flight_radius * s, altitude]
        })
        .collect();
    Ok(WindingPlan {
        center,
        flight_radius,
        altitude,
        revolution_angle_deg,
        start_bearing: start,
        waypoints,
    })
}

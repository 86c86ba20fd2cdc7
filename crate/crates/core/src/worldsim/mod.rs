//! Ground-truth synthetic world: terrain heightfield, box obstacles and
//! vertical poles, plus the queries the simulated robots and sensors need.

mod sensor;
mod terrain;

pub use sensor::{render_depth_pointcloud, PointCloud, SensorSpec};
pub use terrain::{
    heightfield_from_pgm, AnalyticTerrain, Heightfield, PgmTerrain, TerrainFeature, TerrainSource,
};

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pose::Pose6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("position ({x}, {y}) is outside the world bounds")]
    InvalidPosition { x: f64, y: f64 },
    #[error("invalid world: {0}")]
    Invalid(String),
}

/// Axis-aligned rectangle in the ground plane (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min[0] && x <= self.max[0] && y >= self.min[1] && y <= self.max[1]
    }

    pub fn clamp(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x.clamp(self.min[0], self.max[0]),
            y.clamp(self.min[1], self.max[1]),
        )
    }
}

/// Impenetrable axis-aligned box; `extents` are full side lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxObstacle {
    pub center: [f64; 3],
    pub extents: [f64; 3],
}

impl BoxObstacle {
    pub fn top(&self) -> f64 {
        self.center[2] + 0.5 * self.extents[2]
    }

    pub fn min(&self) -> Point3<f64> {
        Point3::new(
            self.center[0] - 0.5 * self.extents[0],
            self.center[1] - 0.5 * self.extents[1],
            self.center[2] - 0.5 * self.extents[2],
        )
    }

    pub fn max(&self) -> Point3<f64> {
        Point3::new(
            self.center[0] + 0.5 * self.extents[0],
            self.center[1] + 0.5 * self.extents[1],
            self.top(),
        )
    }

    pub fn covers(&self, x: f64, y: f64) -> bool {
        (x - self.center[0]).abs() <= 0.5 * self.extents[0]
            && (y - self.center[1]).abs() <= 0.5 * self.extents[1]
    }

    /// Horizontal distance from `(x, y)` to the footprint rectangle (0 inside).
    pub fn footprint_distance(&self, x: f64, y: f64) -> f64 {
        let dx = ((x - self.center[0]).abs() - 0.5 * self.extents[0]).max(0.0);
        let dy = ((y - self.center[1]).abs() - 0.5 * self.extents[1]).max(0.0);
        dx.hypot(dy)
    }

    fn intersect(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        let (lo, hi) = (self.min(), self.max());
        let mut t_near = f64::NEG_INFINITY;
        let mut t_far = f64::INFINITY;
        for k in 0..3 {
            if dir[k].abs() < 1e-15 {
                if origin[k] < lo[k] || origin[k] > hi[k] {
                    return None;
                }
                continue;
            }
            let a = (lo[k] - origin[k]) / dir[k];
            let b = (hi[k] - origin[k]) / dir[k];
            t_near = t_near.max(a.min(b));
            t_far = t_far.min(a.max(b));
        }
        (t_near <= t_far && t_near > 0.0).then_some(t_near)
    }
}

/// Vertical cylinder standing at `base` elevation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pole {
    pub center: [f64; 2],
    pub radius: f64,
    pub base: f64,
    pub height: f64,
}

impl Pole {
    pub fn top(&self) -> f64 {
        self.base + self.height
    }

    pub fn covers(&self, x: f64, y: f64) -> bool {
        (x - self.center[0]).hypot(y - self.center[1]) <= self.radius
    }

    fn intersect(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        let ox = origin.x - self.center[0];
        let oy = origin.y - self.center[1];
        let top = self.top();
        let mut best: Option<f64> = None;
        let a = dir.x * dir.x + dir.y * dir.y;
        if a > 1e-18 {
            let b = 2.0 * (ox * dir.x + oy * dir.y);
            let c = ox * ox + oy * oy - self.radius * self.radius;
            let disc = b * b - 4.0 * a * c;
            if c > 0.0 && disc >= 0.0 {
                let t = (-b - disc.sqrt()) / (2.0 * a);
                let z = origin.z + t * dir.z;
                if t > 0.0 && z >= self.base && z <= top {
                    best = Some(t);
                }
            }
        }
        if dir.z < 0.0 && origin.z >= top {
            let t = (top - origin.z) / dir.z;
            let (x, y) = (ox + t * dir.x, oy + t * dir.y);
            if t > 0.0 && x * x + y * y <= self.radius * self.radius {
                best = Some(best.map_or(t, |b| b.min(t)));
            }
        }
        best
    }
}

/// Synthetic ground-truth world. Read-only after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldModel {
    bounds: Bounds,
    heightfield: Heightfield,
    obstacles: Vec<BoxObstacle>,
    poles: Vec<Pole>,
}

impl WorldModel {
    pub fn new(
        bounds: Bounds,
        heightfield: Heightfield,
        obstacles: Vec<BoxObstacle>,
        poles: Vec<Pole>,
    ) -> Result<Self, WorldError> {
        if !(bounds.width() > 0.0 && bounds.height() > 0.0) {
            return Err(WorldError::Invalid("bounds must have positive area".into()));
        }
        let ext = heightfield.extent();
        const EPS: f64 = 1e-9;
        if ext.min[0] > bounds.min[0] + EPS
            || ext.min[1] > bounds.min[1] + EPS
            || ext.max[0] < bounds.max[0] - EPS
            || ext.max[1] < bounds.max[1] - EPS
        {
            return Err(WorldError::Invalid(
                "heightfield does not cover the world bounds".into(),
            ));
        }
        for (i, b) in obstacles.iter().enumerate() {
            if b.extents.iter().any(|e| !(*e > 0.0)) {
                return Err(WorldError::Invalid(format!(
                    "obstacle {i}: extents must be > 0"
                )));
            }
        }
        for (i, p) in poles.iter().enumerate() {
            if !(p.radius > 0.0) || !(p.height > 0.0) {
                return Err(WorldError::Invalid(format!(
                    "pole {i}: radius and height must be > 0"
                )));
            }
            if !bounds.contains(p.center[0], p.center[1]) {
                return Err(WorldError::Invalid(format!("pole {i} lies outside bounds")));
            }
        }
        Ok(Self {
            bounds,
            heightfield,
            obstacles,
            poles,
        })
    }

    /// Flat world at elevation `h` sampled at `resolution`.
    pub fn flat(bounds: Bounds, resolution: f64, h: f64) -> Result<Self, WorldError> {
        let hf = Heightfield::from_fn(&bounds, resolution, |_, _| h)?;
        Self::new(bounds, hf, Vec::new(), Vec::new())
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn heightfield(&self) -> &Heightfield {
        &self.heightfield
    }

    pub fn obstacles(&self) -> &[BoxObstacle] {
        &self.obstacles
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn with_obstacle(mut self, b: BoxObstacle) -> Self {
        self.obstacles.push(b);
        self
    }

    pub fn with_pole(mut self, p: Pole) -> Result<Self, WorldError> {
        let poles = {
            let mut v = std::mem::take(&mut self.poles);
            v.push(p);
            v
        };
        Self::new(self.bounds, self.heightfield, self.obstacles, poles)
    }

    /// Highest modeled surface at `(x, y)`.
    pub fn sample_height(&self, x: f64, y: f64) -> Result<f64, WorldError> {
        if !self.bounds.contains(x, y) {
            return Err(WorldError::InvalidPosition { x, y });
        }
        let mut h = self
            .heightfield
            .height(x, y)
            .ok_or(WorldError::InvalidPosition { x, y })?;
        for b in self.obstacles.iter().filter(|b| b.covers(x, y)) {
            h = h.max(b.top());
        }
        for p in self.poles.iter().filter(|p| p.covers(x, y)) {
            h = h.max(p.top());
        }
        Ok(h)
    }

    /// Terrain-only height (ignores obstacles and poles).
    pub fn terrain_height(&self, x: f64, y: f64) -> Result<f64, WorldError> {
        if !self.bounds.contains(x, y) {
            return Err(WorldError::InvalidPosition { x, y });
        }
        self.heightfield
            .height(x, y)
            .ok_or(WorldError::InvalidPosition { x, y })
    }

    /// Distance along the unit ray `dir` to the first surface, if any lies
    /// within `max_range`. Boxes and poles are intersected analytically; the
    /// heightfield is marched at half its resolution and refined by bisection.
    pub fn raycast(&self, origin: &Point3<f64>, dir: &Vector3<f64>, max_range: f64) -> Option<f64> {
        let mut limit = max_range;
        let mut best = None;
        let analytic = self
            .obstacles
            .iter()
            .filter_map(|b| b.intersect(origin, dir))
            .chain(self.poles.iter().filter_map(|p| p.intersect(origin, dir)));
        for t in analytic {
            if t <= limit {
                limit = t;
                best = Some(t);
            }
        }
        self.march_terrain(origin, dir, limit).or(best)
    }

    fn march_terrain(&self, origin: &Point3<f64>, dir: &Vector3<f64>, limit: f64) -> Option<f64> {
        let hmax = self.heightfield.max_height();
        let gap = |t: f64| -> Option<f64> {
            let p = origin + dir * t;
            if !self.bounds.contains(p.x, p.y) {
                return None;
            }
            self.heightfield.height(p.x, p.y).map(|h| p.z - h)
        };
        let mut t = 0.0;
        if origin.z > hmax {
            if dir.z >= 0.0 {
                return None;
            }
            t = (origin.z - hmax) / -dir.z;
        }
        if t > limit {
            return None;
        }
        let step = 0.5 * self.heightfield.resolution();
        let mut prev_t = t;
        let mut prev_gap = gap(t)?;
        if prev_gap <= 0.0 {
            return (t > 0.0).then_some(t);
        }
        while t < limit {
            t = (t + step).min(limit);
            let g = gap(t)?;
            if g <= 0.0 {
                let (mut lo, mut hi) = (prev_t, t);
                for _ in 0..64 {
                    let mid = 0.5 * (lo + hi);
                    match gap(mid) {
                        Some(gm) if gm > 0.0 => lo = mid,
                        _ => hi = mid,
                    }
                    if hi - lo < 1e-13 {
                        break;
                    }
                }
                return Some(hi);
            }
            prev_t = t;
            prev_gap = g;
        }
        let _ = prev_gap;
        None
    }
}

/// Pose of a ground vehicle resting on the terrain at `(x, y)`.
///
/// Pitch and roll come from the surface gradient measured by central
/// differences across `footprint` (m); one-sided differences are used where
/// the footprint crosses the world boundary.
pub fn ugv_ground_pose(
    world: &WorldModel,
    x: f64,
    y: f64,
    heading: f64,
    footprint: f64,
) -> Result<Pose6, WorldError> {
    let z = world.sample_height(x, y)?;
    let d = footprint.max(1e-3);
    let slope_along = |dx: f64, dy: f64| -> f64 {
        let fwd = world.sample_height(x + dx, y + dy).ok();
        let back = world.sample_height(x - dx, y - dy).ok();
        match (fwd, back) {
            (Some(f), Some(b)) => (f - b) / (2.0 * d),
            (Some(f), None) => (f - z) / d,
            (None, Some(b)) => (z - b) / d,
            (None, None) => 0.0,
        }
    };
    let gx = slope_along(d, 0.0);
    let gy = slope_along(0.0, d);
    let (s, c) = heading.sin_cos();
    let forward = gx * c + gy * s;
    let left = -gx * s + gy * c;
    let pitch = forward.atan();
    let roll = (left / (1.0 + forward * forward + left * left).sqrt()).asin();
    Ok(Pose6::new(x, y, z, roll, pitch, heading))
}

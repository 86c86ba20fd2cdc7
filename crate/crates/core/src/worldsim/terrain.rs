//! Ground-truth heightfields and the scenario descriptions they are built from.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Bounds, WorldError};
use crate::pgm::Pgm;

/// Regular grid of elevation samples with bilinear interpolation between nodes.
///
/// Node `(row, col)` sits at `origin + (col, row) * resolution`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heightfield {
    resolution: f64,
    origin: [f64; 2],
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    min_height: f64,
    max_height: f64,
}

impl Heightfield {
    pub fn new(
        origin: [f64; 2],
        resolution: f64,
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    ) -> Result<Self, WorldError> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(WorldError::Invalid(format!(
                "heightfield resolution must be > 0, got {resolution}"
            )));
        }
        if rows < 2 || cols < 2 {
            return Err(WorldError::Invalid(format!(
                "heightfield needs at least 2x2 nodes, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(WorldError::Invalid(format!(
                "heightfield has {} samples for {rows}x{cols} nodes",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(WorldError::Invalid(format!(
                "heightfield sample {v} is not finite"
            )));
        }
        let min_height = data.iter().copied().fold(f64::INFINITY, f64::min);
        let max_height = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            resolution,
            origin,
            rows,
            cols,
            data,
            min_height,
            max_height,
        })
    }

    /// Samples `f(x, y)` on a node grid that covers `bounds`.
    pub fn from_fn(
        bounds: &Bounds,
        resolution: f64,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, WorldError> {
        if !(resolution > 0.0) {
            return Err(WorldError::Invalid(format!(
                "heightfield resolution must be > 0, got {resolution}"
            )));
        }
        let cols = ((bounds.width() / resolution) - 1e-9).ceil().max(1.0) as usize + 1;
        let rows = ((bounds.height() / resolution) - 1e-9).ceil().max(1.0) as usize + 1;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let x = bounds.min[0] + c as f64 * resolution;
                let y = bounds.min[1] + r as f64 * resolution;
                data.push(f(x, y));
            }
        }
        Self::new(bounds.min, resolution, rows, cols, data)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn min_height(&self) -> f64 {
        self.min_height
    }

    pub fn max_height(&self) -> f64 {
        self.max_height
    }

    /// Covered rectangle `[origin, origin + (cols-1, rows-1) * resolution]`.
    pub fn extent(&self) -> Bounds {
        Bounds {
            min: self.origin,
            max: [
                self.origin[0] + (self.cols - 1) as f64 * self.resolution,
                self.origin[1] + (self.rows - 1) as f64 * self.resolution,
            ],
        }
    }

    /// Bilinear height at `(x, y)`, `None` outside the node grid.
    pub fn height(&self, x: f64, y: f64) -> Option<f64> {
        let fx = (x - self.origin[0]) / self.resolution;
        let fy = (y - self.origin[1]) / self.resolution;
        const EPS: f64 = 1e-9;
        let max_x = (self.cols - 1) as f64;
        let max_y = (self.rows - 1) as f64;
        if !(fx >= -EPS && fx <= max_x + EPS && fy >= -EPS && fy <= max_y + EPS) {
            return None;
        }
        let fx = fx.clamp(0.0, max_x);
        let fy = fy.clamp(0.0, max_y);
        let c = (fx.floor() as usize).min(self.cols - 2);
        let r = (fy.floor() as usize).min(self.rows - 2);
        let tx = fx - c as f64;
        let ty = fy - r as f64;
        let at = |r: usize, c: usize| self.data[r * self.cols + c];
        let h0 = at(r, c) * (1.0 - tx) + at(r, c + 1) * tx;
        let h1 = at(r + 1, c) * (1.0 - tx) + at(r + 1, c + 1) * tx;
        Some(h0 * (1.0 - ty) + h1 * ty)
    }
}

/// Where a scenario's terrain comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TerrainSource {
    Analytic(AnalyticTerrain),
    Pgm(PgmTerrain),
}

impl Default for TerrainSource {
    fn default() -> Self {
        TerrainSource::Analytic(AnalyticTerrain::default())
    }
}

/// Sum of a constant base elevation and analytic features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalyticTerrain {
    #[serde(default)]
    pub base: f64,
    #[serde(default)]
    pub features: Vec<TerrainFeature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TerrainFeature {
    /// Adds `gradient · (x, y)`.
    Plane { gradient: [f64; 2] },
    /// Rises linearly from 0 at `start` to `height` at `end`, measured along
    /// `end - start`; flat on either side.
    Ramp {
        start: [f64; 2],
        end: [f64; 2],
        height: f64,
    },
    /// Adds `height` on the half-plane `(p - point) · normal >= 0`.
    Step {
        point: [f64; 2],
        normal: [f64; 2],
        height: f64,
    },
}

impl TerrainFeature {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            TerrainFeature::Plane { gradient } => gradient[0] * x + gradient[1] * y,
            TerrainFeature::Ramp { start, end, height } => {
                let d = [end[0] - start[0], end[1] - start[1]];
                let len2 = d[0] * d[0] + d[1] * d[1];
                if len2 == 0.0 {
                    return 0.0;
                }
                let s = ((x - start[0]) * d[0] + (y - start[1]) * d[1]) / len2;
                height * s.clamp(0.0, 1.0)
            }
            TerrainFeature::Step {
                point,
                normal,
                height,
            } => {
                let s = (x - point[0]) * normal[0] + (y - point[1]) * normal[1];
                if s >= 0.0 {
                    height
                } else {
                    0.0
                }
            }
        }
    }
}

impl AnalyticTerrain {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.base + self.features.iter().map(|f| f.eval(x, y)).sum::<f64>()
    }
}

/// 16-bit grayscale heightmap. The top image row is the largest y; node
/// spacing is the terrain resolution and elevation is `offset + level * scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgmTerrain {
    pub path: PathBuf,
    /// Overrides the `# scale <m/level>` header comment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default)]
    pub offset: f64,
}

impl TerrainSource {
    /// Builds the heightfield, resolving relative file paths against `base_dir`.
    pub fn build(
        &self,
        bounds: &Bounds,
        resolution: f64,
        base_dir: &Path,
    ) -> Result<Heightfield, WorldError> {
        match self {
            TerrainSource::Analytic(t) => Heightfield::from_fn(bounds, resolution, |x, y| t.eval(x, y)),
            TerrainSource::Pgm(p) => {
                let path = if p.path.is_absolute() {
                    p.path.clone()
                } else {
                    base_dir.join(&p.path)
                };
                let file = std::fs::File::open(&path).map_err(|e| {
                    WorldError::Invalid(format!("cannot open heightmap {}: {e}", path.display()))
                })?;
                let img = Pgm::read(std::io::BufReader::new(file))
                    .map_err(|e| WorldError::Invalid(format!("{}: {e}", path.display())))?;
                let scale = p.scale.or_else(|| img.comment_value("scale")).ok_or_else(|| {
                    WorldError::Invalid(format!(
                        "{}: no `# scale` header comment and no scale override",
                        path.display()
                    ))
                })?;
                heightfield_from_pgm(&img, bounds.min, resolution, scale, p.offset)
            }
        }
    }
}

pub fn heightfield_from_pgm(
    img: &Pgm,
    origin: [f64; 2],
    resolution: f64,
    scale: f64,
    offset: f64,
) -> Result<Heightfield, WorldError> {
    let (rows, cols) = (img.height, img.width);
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let img_row = rows - 1 - r;
        for c in 0..cols {
            data.push(offset + f64::from(img.get(img_row, c)) * scale);
        }
    }
    Heightfield::new(origin, resolution, rows, cols, data)
}

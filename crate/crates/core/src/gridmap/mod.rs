//! Multi-layer 2.5D elevation grid.
//!
//! Every layer shares the map geometry and stores `Option<f64>` per cell:
//! cells that were never observed (or could not be computed) are `None`,
//! never a sentinel value.
//!
//! Cell `(row, col)` is centred at `origin + (col, row) * resolution`, so
//! rows run along +y and columns along +x. A position belongs to the cell
//! with the nearest centre; positions exactly between two centres go to the
//! lower index.

mod export;

pub use export::{write_layer_exports, LayerExport, LayerMetadata};

use std::collections::BTreeMap;

use nalgebra::{Point2, Point3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::worldsim::{Bounds, PointCloud};

pub const ELEVATION: &str = "elevation";
pub const ELEVATION_INPAINTED: &str = "elevation_inpainted";
pub const SMOOTHED: &str = "smoothed";
pub const SLOPE: &str = "slope";
pub const ROUGHNESS: &str = "roughness";
pub const TRAVERSABILITY: &str = "traversability";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("position ({x}, {y}) is outside the map")]
    OutOfBounds { x: f64, y: f64 },
    #[error("cell ({row}, {col}) is outside the map")]
    InvalidIndex { row: usize, col: usize },
    #[error("map has no layer {0:?}")]
    MissingLayer(String),
    #[error("invalid map: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Neighbour at a signed offset, if it does not underflow.
    pub fn offset(self, dr: isize, dc: isize) -> Option<CellIndex> {
        Some(CellIndex {
            row: self.row.checked_add_signed(dr)?,
            col: self.col.checked_add_signed(dc)?,
        })
    }

    /// Number of 8-connected moves between two cells.
    pub fn chebyshev(self, other: CellIndex) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }
}

/// Counts from one point-cloud integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IntegrationStats {
    pub integrated: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridMap {
    resolution: f64,
    origin: [f64; 2],
    rows: usize,
    cols: usize,
    layers: BTreeMap<String, Vec<Option<f64>>>,
}

impl GridMap {
    /// Empty map with an all-absent `elevation` layer.
    pub fn new(origin: [f64; 2], resolution: f64, rows: usize, cols: usize) -> Result<Self, MapError> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(MapError::Invalid(format!(
                "resolution must be > 0, got {resolution}"
            )));
        }
        if rows == 0 || cols == 0 {
            return Err(MapError::Invalid("map needs at least one cell".into()));
        }
        let mut layers = BTreeMap::new();
        layers.insert(ELEVATION.to_owned(), vec![None; rows * cols]);
        Ok(Self {
            resolution,
            origin,
            rows,
            cols,
            layers,
        })
    }

    /// Map whose cells tile `bounds`.
    pub fn covering(bounds: &Bounds, resolution: f64) -> Result<Self, MapError> {
        if !(resolution > 0.0) {
            return Err(MapError::Invalid(format!(
                "resolution must be > 0, got {resolution}"
            )));
        }
        let cols = (bounds.width() / resolution - 1e-9).ceil().max(1.0) as usize;
        let rows = (bounds.height() / resolution - 1e-9).ceil().max(1.0) as usize;
        Self::new(
            [
                bounds.min[0] + 0.5 * resolution,
                bounds.min[1] + 0.5 * resolution,
            ],
            resolution,
            rows,
            cols,
        )
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, idx: CellIndex) -> bool {
        idx.row < self.rows && idx.col < self.cols
    }

    pub fn flat(&self, idx: CellIndex) -> usize {
        idx.row * self.cols + idx.col
    }

    pub fn unflat(&self, i: usize) -> CellIndex {
        CellIndex::new(i / self.cols, i % self.cols)
    }

    pub fn indices(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.len()).map(|i| self.unflat(i))
    }

    pub fn position_to_index(&self, x: f64, y: f64) -> Result<CellIndex, MapError> {
        // ceil(v - 0.5) rounds to the nearest centre with ties to the lower index.
        let c = ((x - self.origin[0]) / self.resolution - 0.5).ceil();
        let r = ((y - self.origin[1]) / self.resolution - 0.5).ceil();
        if !(c >= 0.0 && r >= 0.0 && c < self.cols as f64 && r < self.rows as f64) {
            return Err(MapError::OutOfBounds { x, y });
        }
        Ok(CellIndex::new(r as usize, c as usize))
    }

    pub fn index_to_position(&self, idx: CellIndex) -> Result<Point2<f64>, MapError> {
        if !self.contains(idx) {
            return Err(MapError::InvalidIndex {
                row: idx.row,
                col: idx.col,
            });
        }
        Ok(self.center(idx))
    }

    /// Cell centre without the bounds check.
    pub fn center(&self, idx: CellIndex) -> Point2<f64> {
        Point2::new(
            self.origin[0] + idx.col as f64 * self.resolution,
            self.origin[1] + idx.row as f64 * self.resolution,
        )
    }

    /// World rectangle covered by the cells.
    pub fn bounds(&self) -> Bounds {
        let h = 0.5 * self.resolution;
        Bounds {
            min: [self.origin[0] - h, self.origin[1] - h],
            max: [
                self.origin[0] + (self.cols as f64 - 0.5) * self.resolution,
                self.origin[1] + (self.rows as f64 - 0.5) * self.resolution,
            ],
        }
    }

    pub fn has_layer(&self, name: &str) -> bool {
        self.layers.contains_key(name)
    }

    pub fn layer_names(&self) -> impl Iterator<Item = &str> {
        self.layers.keys().map(String::as_str)
    }

    pub fn layer(&self, name: &str) -> Result<&[Option<f64>], MapError> {
        self.layers
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| MapError::MissingLayer(name.to_owned()))
    }

    pub fn layer_mut(&mut self, name: &str) -> Result<&mut [Option<f64>], MapError> {
        self.layers
            .get_mut(name)
            .map(Vec::as_mut_slice)
            .ok_or_else(|| MapError::MissingLayer(name.to_owned()))
    }

    /// Inserts or replaces one layer; other layers are untouched.
    pub fn set_layer(&mut self, name: &str, values: Vec<Option<f64>>) -> Result<(), MapError> {
        if values.len() != self.len() {
            return Err(MapError::Invalid(format!(
                "layer {name:?} has {} cells, map has {}",
                values.len(),
                self.len()
            )));
        }
        self.layers.insert(name.to_owned(), values);
        Ok(())
    }

    /// Value of `name` at `idx`; `None` for absent cells, missing layers or
    /// out-of-range indices.
    pub fn get(&self, name: &str, idx: CellIndex) -> Option<f64> {
        if !self.contains(idx) {
            return None;
        }
        self.layers.get(name)?[self.flat(idx)]
    }

    pub fn set(&mut self, name: &str, idx: CellIndex, value: Option<f64>) -> Result<(), MapError> {
        if !self.contains(idx) {
            return Err(MapError::InvalidIndex {
                row: idx.row,
                col: idx.col,
            });
        }
        let i = self.flat(idx);
        self.layer_mut(name)?[i] = value;
        Ok(())
    }

    /// Folds world points into `elevation` as a per-cell running maximum.
    pub fn integrate_points<'a>(
        &mut self,
        points: impl IntoIterator<Item = &'a Point3<f64>>,
    ) -> IntegrationStats {
        let mut stats = IntegrationStats::default();
        if !self.layers.contains_key(ELEVATION) {
            self.layers
                .insert(ELEVATION.to_owned(), vec![None; self.rows * self.cols]);
        }
        for p in points {
            match self.position_to_index(p.x, p.y) {
                Ok(idx) => {
                    let i = self.flat(idx);
                    let cell = &mut self.layers.get_mut(ELEVATION).expect("inserted above")[i];
                    *cell = Some(cell.map_or(p.z, |h| h.max(p.z)));
                    stats.integrated += 1;
                }
                Err(_) => stats.dropped += 1,
            }
        }
        stats
    }

    pub fn integrate_pointcloud(&mut self, cloud: &PointCloud) -> IntegrationStats {
        self.integrate_points(&cloud.points)
    }

    /// Rectangular view over the cells whose centres lie within `radius` of
    /// `center` along each axis, clipped to the map.
    pub fn submap(&self, center: Point2<f64>, radius: f64) -> Result<SubmapView<'_>, MapError> {
        if !(radius > 0.0) {
            return Err(MapError::Invalid(format!("radius must be > 0, got {radius}")));
        }
        let c = self.position_to_index(center.x, center.y)?;
        let res = self.resolution;
        const EPS: f64 = 1e-9;
        let lo = |v: f64, o: f64| ((v - radius - o) / res - EPS).ceil();
        let hi = |v: f64, o: f64| ((v + radius - o) / res + EPS).floor();
        let clip = |v: f64, n: usize| v.clamp(0.0, (n - 1) as f64) as usize;
        let col0 = clip(lo(center.x, self.origin[0]), self.cols).min(c.col);
        let col1 = clip(hi(center.x, self.origin[0]), self.cols).max(c.col);
        let row0 = clip(lo(center.y, self.origin[1]), self.rows).min(c.row);
        let row1 = clip(hi(center.y, self.origin[1]), self.rows).max(c.row);
        Ok(SubmapView {
            map: self,
            center,
            radius,
            row0,
            col0,
            rows: row1 - row0 + 1,
            cols: col1 - col0 + 1,
        })
    }

    /// Cell offsets whose centre distance is at most `radius`, in row-major order.
    pub fn disc_offsets(&self, radius: f64) -> Vec<(isize, isize)> {
        disc_offsets(radius, self.resolution)
    }

    /// Valid cells of `layer` within `radius` of `idx` (centre distance),
    /// in row-major order, paired with their value.
    pub fn neighbors_within<'a>(
        &'a self,
        layer: &'a [Option<f64>],
        idx: CellIndex,
        offsets: &'a [(isize, isize)],
    ) -> impl Iterator<Item = (CellIndex, f64)> + 'a {
        offsets.iter().filter_map(move |&(dr, dc)| {
            let n = idx.offset(dr, dc).filter(|n| self.contains(*n))?;
            layer[self.flat(n)].map(|v| (n, v))
        })
    }
}

pub fn disc_offsets(radius: f64, resolution: f64) -> Vec<(isize, isize)> {
    let span = (radius / resolution + 1e-9).floor() as isize;
    let r2 = radius * radius * (1.0 + 1e-9);
    let mut out = Vec::new();
    for dr in -span..=span {
        for dc in -span..=span {
            let d2 = (dr * dr + dc * dc) as f64 * resolution * resolution;
            if d2 <= r2 {
                out.push((dr, dc));
            }
        }
    }
    out
}

/// Borrowed rectangular window of a [`GridMap`].
#[derive(Debug, Clone, Copy)]
pub struct SubmapView<'a> {
    map: &'a GridMap,
    center: Point2<f64>,
    radius: f64,
    row0: usize,
    col0: usize,
    rows: usize,
    cols: usize,
}

impl<'a> SubmapView<'a> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn parent(&self) -> &'a GridMap {
        self.map
    }

    pub fn parent_index(&self, row: usize, col: usize) -> CellIndex {
        CellIndex::new(self.row0 + row, self.col0 + col)
    }

    pub fn get(&self, layer: &str, row: usize, col: usize) -> Option<f64> {
        if row >= self.rows || col >= self.cols {
            return None;
        }
        self.map.get(layer, self.parent_index(row, col))
    }

    /// Parent indices of every cell in the window, row-major.
    pub fn indices(&self) -> impl Iterator<Item = CellIndex> + 'a {
        let (r0, c0, cols) = (self.row0, self.col0, self.cols);
        (0..self.rows * self.cols).map(move |i| CellIndex::new(r0 + i / cols, c0 + i % cols))
    }

    /// Parent indices whose centre is within the view radius of its centre.
    pub fn disc_indices(&self) -> impl Iterator<Item = CellIndex> + 'a {
        let (map, center, r) = (self.map, self.center, self.radius);
        self.indices()
            .filter(move |i| (map.center(*i) - center).norm() <= r * (1.0 + 1e-12))
    }

    /// Copies the window into a standalone map.
    pub fn to_grid_map(&self) -> GridMap {
        let mut layers = BTreeMap::new();
        for (name, values) in &self.map.layers {
            let v = self
                .indices()
                .map(|i| values[self.map.flat(i)])
                .collect::<Vec<_>>();
            layers.insert(name.clone(), v);
        }
        let o = self.map.center(CellIndex::new(self.row0, self.col0));
        GridMap {
            resolution: self.map.resolution,
            origin: [o.x, o.y],
            rows: self.rows,
            cols: self.cols,
            layers,
        }
    }
}

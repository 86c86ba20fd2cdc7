//! Sequential map filters: inpainting, smoothing, slope, roughness,
//! traversability and the safety minimum filter.
//!
//! Each stage reads the layer written by the previous one and writes its own
//! layer, so re-running the whole pipeline on an unchanged `elevation` layer
//! reproduces the same derived layers.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::gridmap::{
    disc_offsets, CellIndex, GridMap, MapError, ELEVATION, ELEVATION_INPAINTED, ROUGHNESS, SLOPE,
    SMOOTHED, TRAVERSABILITY,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterParams {
    /// Holes within this distance (m) of observed cells are filled.
    pub inpaint_radius: f64,
    /// Radius (m) of the mean filter that produces `smoothed`.
    pub smoothing_radius: f64,
    /// Slope (rad) at which the slope term of traversability reaches zero.
    pub slope_max: f64,
    /// Roughness (m) at which the roughness term reaches zero.
    pub roughness_max: f64,
    /// Radius (m) of the minimum filter on traversability.
    pub min_filter_radius: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            inpaint_radius: 0.3,
            smoothing_radius: 0.15,
            slope_max: 0.6,
            roughness_max: 0.1,
            min_filter_radius: 0.3,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("inpaint_radius", self.inpaint_radius),
            ("smoothing_radius", self.smoothing_radius),
            ("slope_max", self.slope_max),
            ("roughness_max", self.roughness_max),
            ("min_filter_radius", self.min_filter_radius),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be > 0"));
            }
        }
        Ok(())
    }
}

/// Summary of one pipeline pass.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub filled_cells: usize,
    pub traversable_cells: usize,
    pub warnings: Vec<String>,
}

/// Unclamped traversability score.
pub fn traversability_raw(slope: f64, roughness: f64, p: &FilterParams) -> f64 {
    0.5 * (1.0 - slope / p.slope_max) + 0.5 * (1.0 - roughness / p.roughness_max)
}

pub fn traversability(slope: f64, roughness: f64, p: &FilterParams) -> f64 {
    traversability_raw(slope, roughness, p).clamp(0.0, 1.0)
}

/// Fills absent cells that have observed cells within the inpaint radius
/// with the mean of those cells. Returns the number of filled cells, or a
/// warning when the map has no observed cell at all.
pub fn inpaint(map: &mut GridMap, p: &FilterParams) -> Result<(usize, Option<String>), MapError> {
    let src = map.layer(ELEVATION)?.to_vec();
    if src.iter().all(Option::is_none) {
        let msg = "inpaint: elevation layer has no observed cells".to_owned();
        log::warn!("{msg}");
        map.set_layer(ELEVATION_INPAINTED, src)?;
        return Ok((0, Some(msg)));
    }
    let offsets = map.disc_offsets(p.inpaint_radius);
    let mut out = src.clone();
    let mut filled = 0;
    for idx in map.indices() {
        let i = map.flat(idx);
        if src[i].is_some() {
            continue;
        }
        let (sum, n) = map
            .neighbors_within(&src, idx, &offsets)
            .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
        if n > 0 {
            out[i] = Some(sum / n as f64);
            filled += 1;
        }
    }
    map.set_layer(ELEVATION_INPAINTED, out)?;
    Ok((filled, None))
}

/// Mean of valid inpainted cells within the smoothing radius.
pub fn smooth(map: &mut GridMap, p: &FilterParams) -> Result<(), MapError> {
    let src = map.layer(ELEVATION_INPAINTED)?;
    let offsets = map.disc_offsets(p.smoothing_radius);
    let out = map
        .indices()
        .map(|idx| {
            src[map.flat(idx)]?;
            let (sum, n) = map
                .neighbors_within(src, idx, &offsets)
                .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
            Some(sum / n as f64)
        })
        .collect();
    map.set_layer(SMOOTHED, out)
}

/// Slope angle (rad) of the least-squares plane through the valid cells of
/// the 3×3 window, or `None` when fewer than three are valid or they are
/// collinear.
pub fn fit_slope(map: &GridMap, layer: &[Option<f64>], idx: CellIndex) -> Option<f64> {
    let center = layer[map.flat(idx)]?;
    let res = map.resolution();
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    let mut n = 0;
    for dr in -1isize..=1 {
        for dc in -1isize..=1 {
            let Some(nb) = idx.offset(dr, dc).filter(|c| map.contains(*c)) else {
                continue;
            };
            let Some(z) = layer[map.flat(nb)] else {
                continue;
            };
            let row = Vector3::new(dc as f64 * res, dr as f64 * res, 1.0);
            ata += row * row.transpose();
            atb += row * (z - center);
            n += 1;
        }
    }
    if n < 3 {
        return None;
    }
    // Collinear stencils leave the 2x2 spatial block singular.
    let det_xy = ata[(0, 0)] * ata[(1, 1)] - ata[(0, 1)] * ata[(1, 0)];
    if det_xy.abs() < 1e-12 * res.powi(4) {
        return None;
    }
    let sol = ata.lu().solve(&atb)?;
    Some(sol.x.hypot(sol.y).atan())
}

pub fn compute_slope(map: &mut GridMap) -> Result<(), MapError> {
    let src = map.layer(SMOOTHED)?;
    let out = map.indices().map(|idx| fit_slope(map, src, idx)).collect();
    map.set_layer(SLOPE, out)
}

/// `|elevation_inpainted - smoothed|` per cell.
pub fn compute_roughness(map: &mut GridMap) -> Result<(), MapError> {
    let raw = map.layer(ELEVATION_INPAINTED)?;
    let smoothed = map.layer(SMOOTHED)?;
    let out = raw
        .iter()
        .zip(smoothed)
        .map(|(r, s)| Some((r.as_ref()? - s.as_ref()?).abs()))
        .collect();
    map.set_layer(ROUGHNESS, out)
}

pub fn compute_traversability(map: &mut GridMap, p: &FilterParams) -> Result<(), MapError> {
    let slope = map.layer(SLOPE)?;
    let rough = map.layer(ROUGHNESS)?;
    let out = slope
        .iter()
        .zip(rough)
        .map(|(s, r)| Some(traversability((*s)?, (*r)?, p)))
        .collect();
    map.set_layer(TRAVERSABILITY, out)
}

/// Replaces each valid traversability value by the minimum over valid cells
/// within the min-filter radius.
pub fn min_filter(map: &mut GridMap, p: &FilterParams) -> Result<(), MapError> {
    let src = map.layer(TRAVERSABILITY)?.to_vec();
    let offsets = map.disc_offsets(p.min_filter_radius);
    let out = map
        .indices()
        .map(|idx| {
            src[map.flat(idx)]?;
            map.neighbors_within(&src, idx, &offsets)
                .map(|(_, v)| v)
                .reduce(f64::min)
        })
        .collect();
    map.set_layer(TRAVERSABILITY, out)
}

/// Runs every stage in order.
pub fn run_pipeline(map: &mut GridMap, p: &FilterParams) -> Result<FilterReport, MapError> {
    let (filled, warning) = inpaint(map, p)?;
    smooth(map, p)?;
    compute_slope(map)?;
    compute_roughness(map)?;
    compute_traversability(map, p)?;
    min_filter(map, p)?;
    let traversable_cells = map.layer(TRAVERSABILITY)?.iter().flatten().count();
    Ok(FilterReport {
        filled_cells: filled,
        traversable_cells,
        warnings: warning.into_iter().collect(),
    })
}

/// Valid cells within `radius` of every cell, computed by exhaustive pairwise
/// distance checks. Shared by tests as an independent window oracle.
pub fn brute_force_window_min(map: &GridMap, layer: &[Option<f64>], radius: f64) -> Vec<Option<f64>> {
    let offsets = disc_offsets(radius, map.resolution());
    map.indices()
        .map(|idx| {
            layer[map.flat(idx)]?;
            offsets
                .iter()
                .filter_map(|&(dr, dc)| {
                    let n = idx.offset(dr, dc).filter(|n| map.contains(*n))?;
                    layer[map.flat(n)]
                })
                .reduce(f64::min)
        })
        .collect()
}

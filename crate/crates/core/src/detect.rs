//! Cliff, anchor and landing-site detectors. All of them are pure reads of
//! a filtered [`GridMap`].

use serde::{Deserialize, Serialize};

use crate::gridmap::{disc_offsets, CellIndex, GridMap, MapError, ELEVATION, SLOPE, TRAVERSABILITY};
use crate::planner::{cost_to_all, CostField, Path, PlanWeights};

/// Golden angle, rad.
const GOLDEN_ANGLE: f64 = 2.399963229728653;

/// Lower bound on the variance used for peakness, m³.
pub const MIN_VARIANCE: f64 = 1e-6;
/// Neighbourhoods whose summed relative height is below this are too flat
/// to score, m.
pub const MIN_MASS: f64 = 0.05;
/// Fewest valid cells a peakness neighbourhood may have.
pub const MIN_NEIGHBORS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliffParams {
    /// Path cost above which the best path is taken to contain a cliff.
    pub threshold: f64,
    /// Radius around the goal that perturbed goals are drawn from, m.
    pub radius: f64,
    /// Number of perturbed goals besides the goal itself.
    pub count: usize,
}

impl Default for CliffParams {
    fn default() -> Self {
        Self {
            threshold: 150.0,
            radius: 0.4,
            count: 12,
        }
    }
}

impl CliffParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.threshold > 0.0) {
            return Err("threshold must be > 0".into());
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err("radius must be > 0".into());
        }
        if self.count < 1 {
            return Err("count must be >= 1".into());
        }
        Ok(())
    }

    /// The goal followed by `count` points on an Archimedean spiral, sample
    /// `k` at radius `radius * k / count` and angle `k` times the golden angle.
    pub fn goal_samples(&self, goal: [f64; 2]) -> Vec<[f64; 2]> {
        let mut out = vec![goal];
        for k in 1..=self.count {
            let r = self.radius * k as f64 / self.count as f64;
            let (s, c) = (k as f64 * GOLDEN_ANGLE).sin_cos();
            out.push([goal[0] + r * c, goal[1] + r * s]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliffReport {
    pub cliff: bool,
    pub best_goal: [f64; 2],
    /// Infinite when no sample is reachable.
    pub best_cost: f64,
    pub path: Option<Path>,
}

/// Plans from `start` to the goal and its perturbed samples and reports
/// whether even the cheapest of them exceeds the threshold. Samples outside
/// the map are skipped; ties go to the earlier sample.
pub fn detect_cliff(
    map: &GridMap,
    start: [f64; 2],
    goal: [f64; 2],
    w: &PlanWeights,
    p: &CliffParams,
) -> Result<CliffReport, MapError> {
    let s = map.position_to_index(start[0], start[1])?;
    let field = CostField::new(map, w)?;
    let costs = cost_to_all(&field, s);
    let mut best: Option<([f64; 2], CellIndex, f64)> = None;
    for sample in p.goal_samples(goal) {
        let Ok(idx) = map.position_to_index(sample[0], sample[1]) else {
            continue;
        };
        let c = costs[map.flat(idx)];
        if best.is_none_or(|(_, _, b)| c < b) {
            best = Some((sample, idx, c));
        }
    }
    let Some((best_goal, idx, best_cost)) = best else {
        return Ok(CliffReport {
            cliff: true,
            best_goal: goal,
            best_cost: f64::INFINITY,
            path: None,
        });
    };
    let path = if best_cost.is_finite() {
        crate::planner::path_on_field(map, &field, s, idx)
    } else {
        None
    };
    Ok(CliffReport {
        cliff: !(best_cost <= p.threshold),
        best_goal,
        best_cost,
        path,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorCandidate {
    pub cell: CellIndex,
    pub position: [f64; 2],
    /// Elevation of the candidate cell, m.
    pub elevation: f64,
    pub peakness: f64,
    /// `[[σx², σxy²], [σxy², σy²]]`, m³.
    pub covariance: [[f64; 2]; 2],
    /// Larger eigenvalue of the covariance.
    pub sigma_l2: f64,
    /// Smaller eigenvalue of the covariance.
    pub sigma_s2: f64,
    pub radius: f64,
}

/// Eigenvalues of a symmetric 2×2 matrix, larger first.
pub fn symmetric_eigenvalues(a: f64, b: f64, d: f64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let r = (0.5 * (a - d)).hypot(b);
    (mean + r, mean - r)
}

/// Peakness of the raw elevation layer at `idx`.
pub fn peakness(map: &GridMap, idx: CellIndex, radius: f64) -> Result<Option<AnchorCandidate>, MapError> {
    let layer = map.layer(ELEVATION)?;
    Ok(peakness_in(map, layer, idx, &disc_offsets(radius, map.resolution()), radius))
}

fn peakness_in(
    map: &GridMap,
    layer: &[Option<f64>],
    idx: CellIndex,
    offsets: &[(isize, isize)],
    radius: f64,
) -> Option<AnchorCandidate> {
    let zc = layer[map.flat(idx)]?;
    let res = map.resolution();
    let mut lowest = f64::INFINITY;
    let mut n = 0usize;
    for (cell, z) in map.neighbors_within(layer, idx, offsets) {
        if cell != idx && z >= zc {
            return None;
        }
        lowest = lowest.min(z);
        n += 1;
    }
    if n < MIN_NEIGHBORS {
        return None;
    }
    let (mut sxx, mut syy, mut sxy, mut mass) = (0.0, 0.0, 0.0, 0.0);
    for (cell, z) in map.neighbors_within(layer, idx, offsets) {
        let h = z - lowest;
        let x = (cell.col as f64 - idx.col as f64) * res;
        let y = (cell.row as f64 - idx.row as f64) * res;
        sxx += h * x * x;
        syy += h * y * y;
        sxy += h * x * y;
        mass += h;
    }
    if mass < MIN_MASS {
        return None;
    }
    let nf = n as f64;
    let (a, b, d) = (sxx / nf, sxy / nf, syy / nf);
    let (l, s) = symmetric_eigenvalues(a, b, d);
    let centre = map.center(idx);
    Some(AnchorCandidate {
        cell: idx,
        position: [centre.x, centre.y],
        elevation: zc,
        peakness: 1.0 / l.max(MIN_VARIANCE),
        covariance: [[a, b], [b, d]],
        sigma_l2: l,
        sigma_s2: s,
        radius,
    })
}

/// Highest-peakness cell above `threshold` among the cells whose centre is
/// within `region_radius` of `region_center`. Ties go to the lower index.
pub fn detect_anchor(
    map: &GridMap,
    region_center: [f64; 2],
    region_radius: f64,
    threshold: f64,
    neighborhood_radius: f64,
) -> Result<Option<AnchorCandidate>, MapError> {
    let layer = map.layer(ELEVATION)?;
    let offsets = disc_offsets(neighborhood_radius, map.resolution());
    let mut best: Option<AnchorCandidate> = None;
    for idx in map.indices() {
        let c = map.center(idx);
        if (c.x - region_center[0]).hypot(c.y - region_center[1]) > region_radius {
            continue;
        }
        let Some(cand) = peakness_in(map, layer, idx, &offsets, neighborhood_radius) else {
            continue;
        };
        if cand.peakness > threshold && best.as_ref().is_none_or(|b| cand.peakness > b.peakness) {
            best = Some(cand);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandingParams {
    /// m
    pub search_radius: f64,
    /// Largest elevation spread inside the footprint, m.
    pub max_elevation_diff: f64,
    /// rad
    pub max_slope: f64,
    pub min_traversability: f64,
    /// m
    pub footprint_radius: f64,
}

impl Default for LandingParams {
    fn default() -> Self {
        Self {
            search_radius: 2.0,
            max_elevation_diff: 0.05,
            max_slope: 0.2,
            min_traversability: 0.7,
            footprint_radius: 0.2,
        }
    }
}

impl LandingParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("search_radius", self.search_radius),
            ("max_elevation_diff", self.max_elevation_diff),
            ("max_slope", self.max_slope),
            ("footprint_radius", self.footprint_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be > 0"));
            }
        }
        if !(self.min_traversability > 0.0 && self.min_traversability <= 1.0) {
            return Err("min_traversability must be in (0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandingSite {
    pub cell: CellIndex,
    pub position: [f64; 2],
    /// Highest elevation inside the footprint, m.
    pub elevation: f64,
}

/// Checks the landing conditions on the footprint disc around `idx`.
pub fn landing_site_at(map: &GridMap, idx: CellIndex, p: &LandingParams) -> Result<Option<LandingSite>, MapError> {
    let elev = map.layer(ELEVATION)?;
    let slope = map.layer(SLOPE)?;
    let trav = map.layer(TRAVERSABILITY)?;
    let offsets = disc_offsets(p.footprint_radius, map.resolution());
    Ok(check_footprint(map, idx, &offsets, [elev, slope, trav], p))
}

fn check_footprint(
    map: &GridMap,
    idx: CellIndex,
    offsets: &[(isize, isize)],
    [elev, slope, trav]: [&[Option<f64>]; 3],
    p: &LandingParams,
) -> Option<LandingSite> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(dr, dc) in offsets {
        let n = idx.offset(dr, dc).filter(|n| map.contains(*n))?;
        let i = map.flat(n);
        let (z, s, t) = (elev[i]?, slope[i]?, trav[i]?);
        if s > p.max_slope || t < p.min_traversability {
            return None;
        }
        lo = lo.min(z);
        hi = hi.max(z);
    }
    if hi - lo > p.max_elevation_diff {
        return None;
    }
    let c = map.center(idx);
    Some(LandingSite {
        cell: idx,
        position: [c.x, c.y],
        elevation: hi,
    })
}

/// Nearest cell to `uav_pos` within the search radius whose footprint
/// satisfies every landing condition. Equal distances go to the lower index.
pub fn find_landing_pose(map: &GridMap, uav_pos: [f64; 2], p: &LandingParams) -> Result<Option<LandingSite>, MapError> {
    let layers = [map.layer(ELEVATION)?, map.layer(SLOPE)?, map.layer(TRAVERSABILITY)?];
    let offsets = disc_offsets(p.footprint_radius, map.resolution());
    let mut cells: Vec<(f64, usize)> = map
        .indices()
        .filter_map(|idx| {
            let c = map.center(idx);
            let d = (c.x - uav_pos[0]).hypot(c.y - uav_pos[1]);
            (d <= p.search_radius).then(|| (d, map.flat(idx)))
        })
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(cells
        .into_iter()
        .find_map(|(_, i)| check_footprint(map, map.unflat(i), &offsets, layers, p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stencil(n: usize, f: impl Fn(isize, isize) -> f64) -> GridMap {
        let mut m = GridMap::new([0.0, 0.0], 0.1, n, n).unwrap();
        let h = (n / 2) as isize;
        let v = (0..n * n)
            .map(|i| Some(f((i / n) as isize - h, (i % n) as isize - h)))
            .collect();
        m.set_layer(ELEVATION, v).unwrap();
        m
    }

    #[test]
    fn isolated_spike_hits_clamp() {
        let m = stencil(7, |r, c| if (r, c) == (0, 0) { 1.0 } else { 0.0 });
        let a = peakness(&m, CellIndex::new(3, 3), 0.3).unwrap().unwrap();
        assert_eq!(a.sigma_l2, 0.0);
        assert_eq!(a.peakness, 1.0 / MIN_VARIANCE);
    }

    #[test]
    fn ties_are_not_applicable() {
        let m = stencil(7, |r, c| if r == 0 && c.abs() <= 1 { 1.0 } else { 0.0 });
        assert!(peakness(&m, CellIndex::new(3, 3), 0.3).unwrap().is_none());
    }

    #[test]
    fn flat_and_sparse_neighbourhoods() {
        let m = stencil(7, |r, c| if (r, c) == (0, 0) { 0.01 } else { 0.0 });
        assert!(peakness(&m, CellIndex::new(3, 3), 0.3).unwrap().is_none());
        let mut m = stencil(7, |r, c| if (r, c) == (0, 0) { 1.0 } else { 0.0 });
        let keep = [(3, 3), (3, 4), (4, 3), (2, 3)];
        for idx in m.indices().collect::<Vec<_>>() {
            if !keep.contains(&(idx.row, idx.col)) {
                m.set(ELEVATION, idx, None).unwrap();
            }
        }
        assert!(peakness(&m, CellIndex::new(3, 3), 0.3).unwrap().is_none());
    }

    #[test]
    fn eigenvalues_of_diagonal_and_rotated() {
        assert_eq!(symmetric_eigenvalues(3.0, 0.0, 1.0), (3.0, 1.0));
        let (l, s) = symmetric_eigenvalues(2.0, 1.0, 2.0);
        assert!((l - 3.0).abs() < 1e-15 && (s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spiral_samples() {
        let p = CliffParams {
            threshold: 1.0,
            radius: 0.5,
            count: 10,
        };
        let s = p.goal_samples([1.0, 2.0]);
        assert_eq!(s.len(), 11);
        assert_eq!(s[0], [1.0, 2.0]);
        for (k, q) in s.iter().enumerate() {
            let r = (q[0] - 1.0).hypot(q[1] - 2.0);
            assert!((r - 0.05 * k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn params_validate() {
        assert!(CliffParams::default().validate().is_ok());
        assert!(CliffParams { count: 0, ..Default::default() }.validate().is_err());
        assert!(LandingParams::default().validate().is_ok());
        assert!(LandingParams {
            min_traversability: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}

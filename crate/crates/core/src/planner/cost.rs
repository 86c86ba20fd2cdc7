use serde::{Deserialize, Serialize};

use crate::gridmap::{CellIndex, GridMap, MapError, ELEVATION, ELEVATION_INPAINTED, TRAVERSABILITY};

/// Weights of the per-cell planning cost
/// `W_T / (T + eps_T) + W_E * E` for known cells and `W_NaN` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanWeights {
    /// W_T
    pub traversability: f64,
    /// W_E
    pub elevation: f64,
    /// W_NaN, cost of entering an unknown cell. May be infinite to forbid them.
    pub unknown: f64,
    /// eps_T
    pub epsilon: f64,
}

impl Default for PlanWeights {
    fn default() -> Self {
        Self {
            traversability: 1.0,
            elevation: 0.5,
            unknown: 1e3,
            epsilon: 0.01,
        }
    }
}

impl PlanWeights {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.traversability >= 0.0 && self.traversability.is_finite()) {
            return Err("traversability weight must be finite and >= 0".into());
        }
        if !(self.elevation >= 0.0 && self.elevation.is_finite()) {
            return Err("elevation weight must be finite and >= 0".into());
        }
        if !(self.unknown >= 0.0) {
            return Err("unknown-cell cost must be >= 0".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err("epsilon must be > 0".into());
        }
        Ok(())
    }

    /// Largest cost a known cell can have when elevations span `elevation_span` m.
    pub fn max_known_cost(&self, elevation_span: f64) -> f64 {
        self.traversability / self.epsilon + self.elevation * elevation_span
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            traversability: self.traversability * k,
            elevation: self.elevation * k,
            unknown: self.unknown * k,
            epsilon: self.epsilon,
        }
    }
}

/// Elevation layer used for the elevation cost: the inpainted layer when
/// the filters have run, the raw one otherwise.
fn elevation_layer(map: &GridMap) -> Result<&[Option<f64>], MapError> {
    map.layer(ELEVATION_INPAINTED).or_else(|_| map.layer(ELEVATION))
}

fn known_cost(t: f64, e: f64, w: &PlanWeights) -> f64 {
    w.traversability / (t + w.epsilon) + w.elevation * e
}

/// Cost of entering `idx`. Elevation is measured above the lowest cell that
/// has both a traversability and an elevation value.
pub fn cell_cost(map: &GridMap, idx: CellIndex, w: &PlanWeights) -> Result<f64, MapError> {
    let field = CostField::new(map, w)?;
    Ok(if map.contains(idx) { field.cost(map.flat(idx)) } else { w.unknown })
}

/// Per-cell costs of a whole map, precomputed for planning.
#[derive(Debug, Clone, PartialEq)]
pub struct CostField {
    rows: usize,
    cols: usize,
    costs: Vec<f64>,
    min_cost: f64,
}

impl CostField {
    pub fn new(map: &GridMap, w: &PlanWeights) -> Result<Self, MapError> {
        let trav = map.layer(TRAVERSABILITY)?;
        let elev = elevation_layer(map)?;
        let datum = trav
            .iter()
            .zip(elev)
            .filter_map(|(t, e)| t.and(*e))
            .fold(f64::INFINITY, f64::min);
        let costs: Vec<f64> = trav
            .iter()
            .zip(elev)
            .map(|(t, e)| match (t, e) {
                (Some(t), Some(e)) => known_cost(*t, e - datum, w),
                _ => w.unknown,
            })
            .collect();
        Ok(Self::from_costs(map.rows(), map.cols(), costs))
    }

    /// Field from explicit costs (row-major).
    pub fn from_costs(rows: usize, cols: usize, costs: Vec<f64>) -> Self {
        assert_eq!(costs.len(), rows * cols, "cost field size mismatch");
        let min_cost = costs
            .iter()
            .copied()
            .filter(|c| c.is_finite())
            .fold(f64::INFINITY, f64::min);
        Self {
            rows,
            cols,
            costs,
            min_cost: if min_cost.is_finite() { min_cost.max(0.0) } else { 0.0 },
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cost(&self, flat: usize) -> f64 {
        self.costs[flat]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Smallest finite per-cell cost.
    pub fn min_cost(&self) -> f64 {
        self.min_cost
    }
}

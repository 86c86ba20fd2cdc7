use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use super::cost::{CostField, PlanWeights};
use crate::gridmap::{CellIndex, GridMap, MapError};

const NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// An 8-connected cell path. `cost` is the sum of the costs of every cell
/// entered after the start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub cells: Vec<CellIndex>,
    pub waypoints: Vec<[f64; 2]>,
    pub cost: f64,
}

impl Path {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn goal(&self) -> Option<[f64; 2]> {
        self.waypoints.last().copied()
    }

    /// Horizontal length of the waypoint polyline.
    pub fn length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .sum()
    }

    /// Recomputes the cost from a field, summing in path order.
    pub fn recompute_cost(&self, field: &CostField) -> f64 {
        self.cells
            .iter()
            .skip(1)
            .map(|c| field.cost(c.row * field.cols() + c.col))
            .sum()
    }

    /// Prefix of the path up to, but excluding, the first cell matching `stop`.
    pub fn truncate_before(&mut self, field: &CostField, mut stop: impl FnMut(CellIndex) -> bool) {
        if let Some(k) = self.cells.iter().skip(1).position(|c| stop(*c)) {
            self.cells.truncate(k + 1);
            self.waypoints.truncate(k + 1);
            self.cost = self.recompute_cost(field);
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    f: f64,
    steps: u32,
    idx: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so that BinaryHeap pops the smallest key.
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.steps.cmp(&self.steps))
            .then(other.idx.cmp(&self.idx))
    }
}

struct Search {
    g: Vec<f64>,
    steps: Vec<u32>,
    length: Vec<f64>,
    parent: Vec<usize>,
    closed: Vec<bool>,
}

impl Search {
    fn new(n: usize) -> Self {
        Self {
            g: vec![f64::INFINITY; n],
            steps: vec![u32::MAX; n],
            length: vec![f64::INFINITY; n],
            parent: vec![usize::MAX; n],
            closed: vec![false; n],
        }
    }

    /// Best-first expansion. Without a goal this is plain Dijkstra.
    fn run(&mut self, field: &CostField, start: usize, goal: Option<usize>) {
        let (rows, cols) = (field.rows(), field.cols());
        // Shrunk slightly so rounding in f never overestimates.
        let hscale = field.min_cost() * (1.0 - 1e-9);
        let h = |i: usize| match goal {
            Some(gi) => {
                let dr = (i / cols).abs_diff(gi / cols);
                let dc = (i % cols).abs_diff(gi % cols);
                dr.max(dc) as f64 * hscale
            }
            None => 0.0,
        };
        let mut heap = BinaryHeap::new();
        self.g[start] = 0.0;
        self.steps[start] = 0;
        self.length[start] = 0.0;
        heap.push(Entry {
            f: h(start),
            steps: 0,
            idx: start,
        });
        while let Some(Entry { idx, .. }) = heap.pop() {
            if self.closed[idx] {
                continue;
            }
            self.closed[idx] = true;
            if Some(idx) == goal {
                return;
            }
            let (r, c) = ((idx / cols) as isize, (idx % cols) as isize);
            for (dr, dc) in NEIGHBORS {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= rows as isize || nc >= cols as isize {
                    continue;
                }
                let n = nr as usize * cols + nc as usize;
                let step_cost = field.cost(n);
                if self.closed[n] || !step_cost.is_finite() {
                    continue;
                }
                let g = self.g[idx] + step_cost;
                let steps = self.steps[idx] + 1;
                let length = self.length[idx] + if dr != 0 && dc != 0 { SQRT_2 } else { 1.0 };
                let better = g
                    .total_cmp(&self.g[n])
                    .then(steps.cmp(&self.steps[n]))
                    .then(length.total_cmp(&self.length[n]))
                    .then(idx.cmp(&self.parent[n]))
                    == Ordering::Less;
                if better {
                    self.g[n] = g;
                    self.steps[n] = steps;
                    self.length[n] = length;
                    self.parent[n] = idx;
                    heap.push(Entry { f: g + h(n), steps, idx: n });
                }
            }
        }
    }

    fn trace(&self, goal: usize) -> Vec<usize> {
        let mut out = vec![goal];
        let mut cur = goal;
        while self.parent[cur] != usize::MAX {
            cur = self.parent[cur];
            out.push(cur);
        }
        out.reverse();
        out
    }
}

/// A* between two cells of a cost field. Cells with infinite cost are
/// impassable. Among equal-cost paths the one with fewer cells wins, then the
/// geometrically shorter one, then the lower parent index.
/// Returns the cell sequence and its cost.
pub fn astar_cells(field: &CostField, start: CellIndex, goal: CellIndex) -> Option<(Vec<CellIndex>, f64)> {
    let cols = field.cols();
    let inside = |c: CellIndex| c.row < field.rows() && c.col < cols;
    if !inside(start) || !inside(goal) {
        return None;
    }
    let (s, g) = (start.row * cols + start.col, goal.row * cols + goal.col);
    let mut search = Search::new(field.rows() * cols);
    search.run(field, s, Some(g));
    if !search.g[g].is_finite() {
        return None;
    }
    let cells = search
        .trace(g)
        .into_iter()
        .map(|i| CellIndex::new(i / cols, i % cols))
        .collect();
    Some((cells, search.g[g]))
}

/// Dijkstra from `start` to every cell. Unreachable cells are infinite.
pub fn cost_to_all(field: &CostField, start: CellIndex) -> Vec<f64> {
    let mut search = Search::new(field.rows() * field.cols());
    if start.row < field.rows() && start.col < field.cols() {
        search.run(field, start.row * field.cols() + start.col, None);
    }
    search.g
}

/// Plans on `map` from `start` to `goal` (world xy). `Ok(None)` means no
/// path: the goal is unreachable or the start lies outside the map.
/// A goal outside the map is an error.
pub fn astar_plan(
    map: &GridMap,
    start: [f64; 2],
    goal: [f64; 2],
    w: &PlanWeights,
) -> Result<Option<Path>, MapError> {
    let g = map.position_to_index(goal[0], goal[1])?;
    let Ok(s) = map.position_to_index(start[0], start[1]) else {
        return Ok(None);
    };
    let field = CostField::new(map, w)?;
    Ok(path_on_field(map, &field, s, g))
}

pub(crate) fn path_on_field(map: &GridMap, field: &CostField, s: CellIndex, g: CellIndex) -> Option<Path> {
    astar_cells(field, s, g).map(|(cells, cost)| {
        let waypoints = cells
            .iter()
            .map(|c| {
                let p: Point2<f64> = map.center(*c);
                [p.x, p.y]
            })
            .collect();
        Path { cells, waypoints, cost }
    })
}

//! Ground and air motion planning.
//!
//! The UGV plans with A* over per-cell costs derived from traversability and
//! elevation and tracks the result with pure pursuit. The UAV uses a simple
//! straight-line flight step that holds a clearance above known terrain.

mod astar;
mod cost;
mod flight;
mod pursuit;

pub use astar::{astar_cells, astar_plan, cost_to_all, Path};
pub(crate) use astar::path_on_field;
pub use cost::{cell_cost, CostField, PlanWeights};
pub use flight::{corridor_altitude, flight_step, uav_goto_step, FlightParams, FlightStep};
pub use pursuit::{integrate_unicycle, pure_pursuit_step, PursuitCommand, PursuitParams};

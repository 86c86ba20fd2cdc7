//! Simulation and planning stack for a UAV/UGV team joined by a tether.
//!
//! The UAV scouts ahead and builds a 2.5D elevation map, the UGV plans over
//! the filtered traversability layer, and when an unavoidable cliff blocks
//! the way the UAV winds the tether around a pole on top so the UGV can winch
//! itself up.
//!
//! - [`worldsim`]: ground-truth terrain, obstacles, poles and depth sensing
//! - [`gridmap`]: multi-layer elevation grid shared by both robots
//! - [`mapfilter`]: inpainting, smoothing, slope, roughness, traversability
//! - [`planner`]: grid A*, pure pursuit and the UAV waypoint flight step
//! - [`detect`]: cliff, anchor (peakness) and landing-site detection
//! - [`tether`]: winding trajectory, wrap geometry, hook model, winch climb
//! - [`mission`]: the deterministic mission state machine and its log
//! - [`scenario`]: scenario files and run artifacts

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detect;
pub mod gridmap;
pub mod mapfilter;
pub mod mission;
pub mod pgm;
pub mod planner;
pub mod pose;
pub mod rng;
pub mod scenario;
pub mod tether;
pub mod worldsim;

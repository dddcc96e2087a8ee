//! Deterministic quadcopter search-and-rescue simulation core.
//!
//! Everything here is `no_std` (with `alloc`): rigid-body kinematics and a
//! small thrust/torque plant, MPU6050-style sensor corruption, accelerometer
//! inclination with a gated complementary filter, the PID stabilizer and
//! mixer, SSD anchor/matching/NMS geometry with a downward pinhole camera,
//! and the lawnmower mission layer. File formats and the command line live in
//! the `quadsar` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod config;
pub mod control;
pub mod detection;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod geom;
pub mod mission;
pub mod rng;
pub mod sensors;
pub mod sim;

pub use config::{Config, InitialConditions, MissionConfig};
pub use error::{Error, Result};
pub use sim::{detector_tick, SimConfig, Simulation, TickRecord, WorldState};

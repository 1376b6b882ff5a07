//! Software model of a three-wheel table tennis ball launcher.
//!
//! The crate has two halves:
//!
//! * [`sim`]: a deterministic, seedable model of the launcher hardware and
//!   of the ball flight (motor curves, spin-up, launch kinematics, drag and
//!   Magnus flight, one table rebound, camera observation, ball feed).
//! * [`lab`]: processing of recorded or simulated trajectories (filters,
//!   landing point estimation, accuracy statistics, file formats) and the
//!   accuracy experiment harness.
//!
//! [`dataset`] generates synthetic recording campaigns with a fixed mix of
//! control regimes, and [`measured`] embeds reference accuracy measurements
//! of the physical launcher used as regression anchors.

// negated comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod lab;
pub mod measured;
pub mod sim;

pub use error::{Error, Result};

/// Three-vector used for positions, velocities and spins.
pub type Vec3 = nalgebra::Vector3<f64>;

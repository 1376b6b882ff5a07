//! Target shooting: a feed-forward network that maps a desired ball
//! position to launcher controls, trained on recorded trajectories.
//!
//! [`data`] turns trajectories into training rows, [`train`] fits an
//! [`MlpModel`] with Adam and dropout, and [`grid`] aims at a grid of landing
//! targets and measures how close the balls land.

// negated comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod grid;
pub mod mlp;
pub mod model;
pub mod normalize;
pub mod train;

pub use data::{build_training_set, TrainingRow};
pub use error::{Result, ShootError};
pub use grid::{evaluate_grid, target_grid, Aim, GridReport, NearestNeighbor};
pub use model::{Controls, MlpModel};
pub use train::{train, EpochRecord, TrainConfig, TrainOutcome};

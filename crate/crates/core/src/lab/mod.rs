//! Trajectory processing: filters, landing estimation, accuracy statistics,
//! file formats and the accuracy experiment harness.

pub mod experiment;
pub mod filters;
pub mod landing;
pub mod stats;
pub mod table;
pub mod trajectory;
pub mod transform;

pub use experiment::{
    process_trajectory, run_accuracy_experiment, ExperimentConfig, ExperimentResult,
    LaunchHarness,
};
pub use filters::{
    filter_position_jump, filter_rebound, filter_region, filter_time_jump, run_pipeline,
    FilterReport, PipelineConfig, PositionJumpResult,
};
pub use landing::{estimate_landing, LandingPoint};
pub use stats::{compute_stats, stats_from_points, AccuracyStats};
pub use table::TableRegion;
pub use trajectory::{load_dir, load_trajectories, read_jsonl, BallSample, Trajectory};
pub use transform::{transform_to_table_frame, Pose, RawSample};

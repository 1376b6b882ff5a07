use launcher_core::lab::{estimate_landing, PipelineConfig, Trajectory};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShootError};
use crate::model::Controls;

/// One supervised pair: a ball position and the controls that produced the
/// trajectory through it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub input: [f64; 3],
    /// Azimuth (deg), altitude (deg), common wheel actuation (percent).
    pub target: [f64; 3],
}

/// Controls recorded with a trajectory, with the wheels reduced to their mean.
pub fn trajectory_controls(traj: &Trajectory) -> Option<Controls> {
    traj.control.map(|s| {
        let w = s.wheels().as_array();
        Controls {
            azimuth_deg: s.azimuth_deg(),
            altitude_deg: s.altitude_deg(),
            actuation: (w[0] + w[1] + w[2]) / 3.0,
        }
    })
}

/// One row per pre-rebound sample of each trajectory, using default landing
/// settings. See [`build_training_set_with`].
pub fn build_training_set(trajectories: &[Trajectory], equal_wheels_only: bool) -> Result<Vec<TrainingRow>> {
    build_training_set_with(trajectories, equal_wheels_only, &PipelineConfig::default())
}

/// One row per sample up to the estimated landing time. Trajectories
/// without a rebound contribute all samples; trajectories without control
/// parameters, and with `equal_wheels_only` those with differing wheel
/// actuations, contribute none.
pub fn build_training_set_with(
    trajectories: &[Trajectory],
    equal_wheels_only: bool,
    cfg: &PipelineConfig,
) -> Result<Vec<TrainingRow>> {
    let mut rows = Vec::new();
    for traj in trajectories {
        let Some(state) = traj.control else { continue };
        if equal_wheels_only && !state.wheels().is_equal() {
            continue;
        }
        let target = trajectory_controls(traj).expect("control present").as_array();
        let t_end = estimate_landing(traj.samples(), cfg.window, &cfg.region)
            .map_or(f64::INFINITY, |l| l.t_land);
        rows.extend(
            traj.samples()
                .iter()
                .take_while(|s| s.t <= t_end)
                .map(|s| TrainingRow {
                    input: [s.position.x, s.position.y, s.position.z],
                    target,
                }),
        );
    }
    if rows.is_empty() {
        return Err(ShootError::EmptyTrainingSet);
    }
    Ok(rows)
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::filters::{run_pipeline, FilterReport, PipelineConfig};
use crate::lab::landing::{estimate_landing, LandingPoint};
use crate::lab::stats::{compute_stats, AccuracyStats};
use crate::lab::trajectory::Trajectory;
use crate::sim::state::{ALTITUDE_RANGE_DEG, AZIMUTH_RANGE_DEG};
use crate::sim::{LauncherState, SimLauncher};

/// Anything that can set launcher parameters and return the observed
/// trajectory of a launch: the simulator directly, or a remote server.
pub trait LaunchHarness {
    fn apply_state(&mut self, state: &LauncherState) -> Result<()>;
    fn set_orientation(&mut self, azimuth_deg: f64, altitude_deg: f64) -> Result<()>;
    /// Launches once and returns the recorded trajectory.
    fn launch(&mut self) -> Result<Trajectory>;
}

impl LaunchHarness for SimLauncher {
    fn apply_state(&mut self, state: &LauncherState) -> Result<()> {
        self.set_state(*state)
    }

    fn set_orientation(&mut self, azimuth_deg: f64, altitude_deg: f64) -> Result<()> {
        SimLauncher::set_orientation(self, azimuth_deg, altitude_deg)
    }

    fn launch(&mut self) -> Result<Trajectory> {
        let shot = self.fire()?;
        Trajectory::new(
            "sim",
            shot.observed,
            Some(shot.state),
            self.config().geometry.distance_to_table,
        )
    }
}

/// Settings of one accuracy series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_launches: usize,
    /// Move to the lowest altitude and leftmost azimuth and back before
    /// every launch.
    pub orientation_jump: bool,
    pub pipeline: PipelineConfig,
}

impl ExperimentConfig {
    pub fn new(n_launches: usize) -> Self {
        Self {
            n_launches,
            orientation_jump: false,
            pipeline: PipelineConfig::default(),
        }
    }
}

/// Outcome of one accuracy series.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub stats: AccuracyStats,
    /// Landings of the trajectories that passed every filter.
    pub landings: Vec<LandingPoint>,
    pub reports: Vec<FilterReport>,
}

impl ExperimentResult {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.landings.iter().map(|l| (l.x, l.y)).collect()
    }

    /// Reports of trajectories that any filter changed or dropped.
    pub fn flagged(&self) -> impl Iterator<Item = &FilterReport> {
        self.reports.iter().filter(|r| r.modified())
    }
}

/// Filters a trajectory and estimates its landing; `None` when dropped.
pub fn process_trajectory(
    traj: &Trajectory,
    cfg: &PipelineConfig,
) -> (Option<LandingPoint>, FilterReport) {
    let (kept, report) = run_pipeline(traj, cfg);
    let landing = kept
        .and_then(|t| estimate_landing(t.samples(), cfg.window, &cfg.region).ok())
        .filter(|l| l.valid);
    (landing, report)
}

/// Launches `n_launches` balls at `state`, filters the recordings and
/// computes the landing scatter.
pub fn run_accuracy_experiment<H: LaunchHarness + ?Sized>(
    harness: &mut H,
    state: &LauncherState,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult> {
    if cfg.n_launches == 0 {
        return Err(Error::InsufficientData("n_launches must be at least 1".into()));
    }
    harness.apply_state(state)?;
    let mut landings = Vec::new();
    let mut reports = Vec::with_capacity(cfg.n_launches);
    for k in 0..cfg.n_launches {
        if cfg.orientation_jump {
            harness.set_orientation(AZIMUTH_RANGE_DEG.0, ALTITUDE_RANGE_DEG.0)?;
            harness.set_orientation(state.azimuth_deg(), state.altitude_deg())?;
        }
        let mut traj = harness.launch()?;
        traj.id = format!("{}-{k}", traj.id);
        let (landing, report) = process_trajectory(&traj, &cfg.pipeline);
        landings.extend(landing);
        reports.push(report);
    }
    let stats = compute_stats(&landings)?;
    Ok(ExperimentResult {
        stats,
        landings,
        reports,
    })
}

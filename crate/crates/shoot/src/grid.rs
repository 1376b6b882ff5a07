use std::io::Write;

use launcher_core::lab::{process_trajectory, LaunchHarness, PipelineConfig, Trajectory};
use launcher_core::sim::LauncherState;
use serde::{Deserialize, Serialize};

use crate::data::trajectory_controls;
use crate::error::{Result, ShootError};
use crate::model::{Controls, MlpModel};

/// Extent of the evaluation grid on the far half of the table (m).
pub const GRID_X: (f64, f64) = (1.57, 2.60);
pub const GRID_Y: (f64, f64) = (-0.55, 0.55);
/// Height at which landing targets are queried (table surface, m).
pub const QUERY_HEIGHT: f64 = 0.76;

/// Evenly spaced targets: 20 gives 5 rows along x by 4 columns along y,
/// 1 gives the grid center. Other counts use the most square layout with
/// `nx ≥ ny` whose product equals `n`.
pub fn target_grid(n: usize) -> Result<Vec<[f64; 2]>> {
    if n == 0 {
        return Err(ShootError::InvalidConfig("grid needs at least one target".into()));
    }
    let ny = (1..=n)
        .filter(|d| n.is_multiple_of(*d) && d * d <= n)
        .max()
        .unwrap_or(1);
    let nx = n / ny;
    let lin = |(lo, hi): (f64, f64), k: usize, m: usize| {
        if m == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (m - 1) as f64
        }
    };
    Ok((0..nx)
        .flat_map(|i| (0..ny).map(move |j| [lin(GRID_X, i, nx), lin(GRID_Y, j, ny)]))
        .collect())
}

/// Maps a landing target on the table plane to launcher controls.
pub trait Aim {
    fn aim(&self, target: [f64; 2]) -> Controls;
}

impl Aim for MlpModel {
    fn aim(&self, target: [f64; 2]) -> Controls {
        self.predict(&[target[0], target[1], QUERY_HEIGHT])
    }
}

/// Baseline that reuses the controls of the recorded trajectory landing
/// closest to the target.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestNeighbor {
    pub entries: Vec<([f64; 2], Controls)>,
}

impl NearestNeighbor {
    pub fn from_trajectories(trajectories: &[Trajectory], pipeline: &PipelineConfig) -> Result<Self> {
        let entries: Vec<_> = trajectories
            .iter()
            .filter_map(|t| {
                let c = trajectory_controls(t)?;
                let (l, _) = process_trajectory(t, pipeline);
                l.map(|l| ([l.x, l.y], c))
            })
            .collect();
        if entries.is_empty() {
            return Err(ShootError::EmptyTrainingSet);
        }
        Ok(Self { entries })
    }
}

impl Aim for NearestNeighbor {
    fn aim(&self, target: [f64; 2]) -> Controls {
        let d = |p: &[f64; 2]| (p[0] - target[0]).hypot(p[1] - target[1]);
        self.entries
            .iter()
            .min_by(|a, b| d(&a.0).total_cmp(&d(&b.0)))
            .map(|e| e.1)
            .expect("at least one entry")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetResult {
    pub target: [f64; 2],
    pub controls: Controls,
    /// `None` when the launch produced no valid landing.
    pub landing: Option<[f64; 2]>,
    /// Euclidean distance on the table plane (m).
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub targets: Vec<TargetResult>,
    /// Mean error over the targets with a landing; NaN when none landed.
    pub mean_error: f64,
    pub missed: usize,
}

/// Aims at every target in turn, launches once through `harness` with the
/// remaining settings taken from `base`, and measures the landing error.
pub fn evaluate_grid<A: Aim + ?Sized, H: LaunchHarness + ?Sized>(
    aim: &A,
    harness: &mut H,
    targets: &[[f64; 2]],
    base: &LauncherState,
    pipeline: &PipelineConfig,
) -> Result<GridReport> {
    let mut results = Vec::with_capacity(targets.len());
    for &target in targets {
        let controls = aim.aim(target).clamped();
        harness.apply_state(&controls.apply_to(base))?;
        let traj = harness.launch()?;
        let (landing, _) = process_trajectory(&traj, pipeline);
        let landing = landing.map(|l| [l.x, l.y]);
        results.push(TargetResult {
            target,
            controls,
            landing,
            error: landing.map(|l| (l[0] - target[0]).hypot(l[1] - target[1])),
        });
    }
    let errors: Vec<f64> = results.iter().filter_map(|r| r.error).collect();
    Ok(GridReport {
        mean_error: errors.iter().sum::<f64>() / errors.len() as f64,
        missed: results.len() - errors.len(),
        targets: results,
    })
}

#[derive(Serialize)]
struct ReportRow {
    target_x: f64,
    target_y: f64,
    azimuth_deg: f64,
    altitude_deg: f64,
    actuation: f64,
    landing_x: Option<f64>,
    landing_y: Option<f64>,
    error: Option<f64>,
}

/// Writes one CSV row per target; missing landings leave the last three
/// fields empty.
pub fn write_grid_csv<W: Write>(out: W, report: &GridReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &report.targets {
        w.serialize(ReportRow {
            target_x: r.target[0],
            target_y: r.target[1],
            azimuth_deg: r.controls.azimuth_deg,
            altitude_deg: r.controls.altitude_deg,
            actuation: r.controls.actuation,
            landing_x: r.landing.map(|l| l[0]),
            landing_y: r.landing.map(|l| l[1]),
            error: r.error,
        })?;
    }
    w.flush()?;
    Ok(())
}

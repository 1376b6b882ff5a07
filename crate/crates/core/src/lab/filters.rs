use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::lab::landing::estimate_landing;
use crate::lab::table::TableRegion;
use crate::lab::trajectory::{BallSample, Trajectory};
use crate::Vec3;

/// Largest allowed gap between consecutive samples (s).
pub const MAX_TIME_GAP: f64 = 0.5;
/// Largest allowed deviation of a sample from its neighborhood (m).
pub const MAX_POSITION_DEVIATION: f64 = 0.05;
/// Neighborhood size of the position-jump filter.
pub const NEIGHBORHOOD: usize = 15;
/// Smallest one-sided neighborhood used for a one-sided fit.
const MIN_SIDE: usize = 4;

/// `true` when the trajectory is kept: no consecutive gap exceeds 0.5 s.
pub fn filter_time_jump(traj: &Trajectory) -> bool {
    traj.samples()
        .windows(2)
        .all(|w| w[1].t - w[0].t <= MAX_TIME_GAP)
}

/// Result of the position-jump filter.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionJumpResult {
    pub trajectory: Trajectory,
    /// Indices (into the input) of removed samples.
    pub removed: Vec<usize>,
    /// Too few samples to form a neighborhood; passed through unchanged.
    pub too_short: bool,
}

/// Per-axis least-squares quadratic in time.
struct QuadFit {
    t0: f64,
    scale: f64,
    coef: [Vector3<f64>; 3],
}

impl QuadFit {
    fn new(points: &[&BallSample]) -> Option<Self> {
        if points.len() < 3 {
            return None;
        }
        let t0 = points.iter().map(|s| s.t).sum::<f64>() / points.len() as f64;
        let scale = points
            .iter()
            .map(|s| (s.t - t0).abs())
            .fold(0.0, f64::max)
            .max(1e-9);
        let mut ata = Matrix3::<f64>::zeros();
        let mut atb = [Vector3::<f64>::zeros(); 3];
        for s in points {
            let row = Self::basis(t0, scale, s.t);
            ata += row * row.transpose();
            for (axis, rhs) in atb.iter_mut().enumerate() {
                *rhs += row * s.position[axis];
            }
        }
        let chol = ata.cholesky()?;
        Some(Self {
            t0,
            scale,
            coef: atb.map(|b| chol.solve(&b)),
        })
    }

    fn basis(t0: f64, scale: f64, t: f64) -> Vector3<f64> {
        let u = (t - t0) / scale;
        Vector3::new(1.0, u, u * u)
    }

    fn at(&self, t: f64) -> Vec3 {
        let row = Self::basis(self.t0, self.scale, t);
        Vec3::new(
            row.dot(&self.coef[0]),
            row.dot(&self.coef[1]),
            row.dot(&self.coef[2]),
        )
    }

    fn deviation(&self, s: &BallSample) -> f64 {
        (self.at(s.t) - s.position).norm()
    }
}

/// Deviation of `s` from a quadratic through `points`, refitted once
/// without the points that deviate from the first fit by more than the
/// threshold.
fn fit_deviation(points: &[&BallSample], s: &BallSample) -> Option<f64> {
    let first = QuadFit::new(points)?;
    let trimmed: Vec<&BallSample> = points
        .iter()
        .filter(|p| first.deviation(p) <= MAX_POSITION_DEVIATION)
        .copied()
        .collect();
    let fit = if trimmed.len() >= 3 && trimmed.len() < points.len() {
        QuadFit::new(&trimmed).unwrap_or(first)
    } else {
        first
    };
    Some(fit.deviation(s))
}

/// Removes samples that deviate by more than 5 cm from their neighborhood
/// of the 15 samples closest in time.
///
/// The deviation is measured against a local quadratic-in-time fit of the
/// neighborhood rather than its centroid, since the centroid of a moving
/// ball's neighbors lags behind curved and edge samples. Besides the fit
/// through the whole neighborhood, fits through only its earlier and only
/// its later members are tried, so a sample at the table rebound is judged
/// against the flight phase it belongs to. A sample is removed when every
/// available fit misses it. All deviations are computed on the original
/// samples in a single pass.
pub fn filter_position_jump(traj: &Trajectory) -> PositionJumpResult {
    let s = traj.samples();
    let n = s.len();
    if n < NEIGHBORHOOD + 1 {
        return PositionJumpResult {
            trajectory: traj.clone(),
            removed: Vec::new(),
            too_short: true,
        };
    }
    let mut removed = Vec::new();
    for i in 0..n {
        let neighbors = nearest_in_time(s, i, NEIGHBORHOOD);
        let all: Vec<&BallSample> = neighbors.iter().map(|&j| &s[j]).collect();
        let before: Vec<&BallSample> = neighbors
            .iter()
            .filter(|&&j| j < i)
            .map(|&j| &s[j])
            .collect();
        let after: Vec<&BallSample> = neighbors
            .iter()
            .filter(|&&j| j > i)
            .map(|&j| &s[j])
            .collect();
        let mut best = fit_deviation(&all, &s[i]);
        for side in [&before, &after] {
            if side.len() >= MIN_SIDE {
                if let Some(d) = fit_deviation(side, &s[i]) {
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
            }
        }
        if best.is_some_and(|d| d > MAX_POSITION_DEVIATION) {
            removed.push(i);
        }
    }
    let trajectory = traj.with_samples_where(|i, _| removed.binary_search(&i).is_err());
    PositionJumpResult {
        trajectory,
        removed,
        too_short: false,
    }
}

/// Indices of the `k` samples closest in time to sample `i`, excluding it.
/// Ties go to the earlier sample.
fn nearest_in_time(s: &[BallSample], i: usize, k: usize) -> Vec<usize> {
    let (mut lo, mut hi) = (i, i);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let left = lo.checked_sub(1);
        let right = (hi + 1 < s.len()).then_some(hi + 1);
        match (left, right) {
            (Some(l), Some(r)) => {
                if s[i].t - s[l].t <= s[r].t - s[i].t {
                    out.push(l);
                    lo = l;
                } else {
                    out.push(r);
                    hi = r;
                }
            }
            (Some(l), None) => {
                out.push(l);
                lo = l;
            }
            (None, Some(r)) => {
                out.push(r);
                hi = r;
            }
            (None, None) => break,
        }
    }
    out.sort_unstable();
    out
}

/// Keeps samples inside the relaxed table region.
pub fn filter_region(traj: &Trajectory, region: &TableRegion) -> Trajectory {
    traj.with_samples_where(|_, s| region.in_relaxed(s.position.x, s.position.y))
}

/// `true` when the trajectory is kept: it rebounds on the table. With
/// `keep_misses`, trajectories that land in the relaxed region around the
/// table, or that descend through the table plane there without a rebound,
/// are kept as well.
pub fn filter_rebound(
    traj: &Trajectory,
    region: &TableRegion,
    window: usize,
    contact_height: f64,
    keep_misses: bool,
) -> bool {
    match estimate_landing(traj.samples(), window, region) {
        Ok(l) if l.valid && region.on_table(l.x, l.y) => true,
        Ok(l) => keep_misses && l.valid,
        Err(_) => keep_misses && descends_in_region(traj.samples(), region, contact_height),
    }
}

fn descends_in_region(s: &[BallSample], region: &TableRegion, z: f64) -> bool {
    s.windows(2).any(|w| {
        if w[0].position.z >= z && w[1].position.z < z {
            let u = (w[0].position.z - z) / (w[0].position.z - w[1].position.z);
            let p = w[0].position + (w[1].position - w[0].position) * u;
            region.in_relaxed(p.x, p.y)
        } else {
            false
        }
    })
}

/// What the filter pipeline did to one trajectory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FilterReport {
    pub id: String,
    pub time_jump_dropped: bool,
    pub position_jump_removed: usize,
    pub position_jump_skipped: bool,
    pub region_removed: usize,
    pub rebound_dropped: bool,
}

impl FilterReport {
    /// Any filter changed or dropped the trajectory.
    pub fn modified(&self) -> bool {
        self.time_jump_dropped
            || self.position_jump_removed > 0
            || self.position_jump_skipped
            || self.region_removed > 0
            || self.rebound_dropped
    }

    pub fn dropped(&self) -> bool {
        self.time_jump_dropped || self.rebound_dropped
    }
}

/// Settings of the filter pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub region: TableRegion,
    /// Samples per landing fit window.
    pub window: usize,
    /// Ball center height at table contact (m).
    pub contact_height: f64,
    pub keep_misses: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let region = TableRegion::default();
        Self {
            contact_height: region.height + 0.020,
            region,
            window: crate::lab::landing::DEFAULT_WINDOW,
            keep_misses: false,
        }
    }
}

/// Time jump, position jump, region and rebound filters in that order.
/// Returns the surviving trajectory, if any, and the report.
pub fn run_pipeline(traj: &Trajectory, cfg: &PipelineConfig) -> (Option<Trajectory>, FilterReport) {
    let mut report = FilterReport {
        id: traj.id.clone(),
        ..FilterReport::default()
    };
    if !filter_time_jump(traj) {
        report.time_jump_dropped = true;
        return (None, report);
    }
    let pj = filter_position_jump(traj);
    report.position_jump_removed = pj.removed.len();
    report.position_jump_skipped = pj.too_short;
    let region = filter_region(&pj.trajectory, &cfg.region);
    report.region_removed = pj.trajectory.len() - region.len();
    if !filter_rebound(
        &region,
        &cfg.region,
        cfg.window,
        cfg.contact_height,
        cfg.keep_misses,
    ) {
        report.rebound_dropped = true;
        return (None, report);
    }
    (Some(region), report)
}

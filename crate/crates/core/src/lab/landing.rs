use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::table::TableRegion;
use crate::lab::trajectory::BallSample;

/// Default number of samples per fit window.
pub const DEFAULT_WINDOW: usize = 5;
/// Slope difference below which the two fits count as parallel (m/s).
pub const PARALLEL_TOLERANCE: f64 = 1e-6;

/// Estimated impact point on the table plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandingPoint {
    pub x: f64,
    pub y: f64,
    pub t_land: f64,
    pub valid: bool,
}

/// Least-squares line `z = a + b·(t − t_ref)`.
fn fit_line(samples: &[BallSample], t_ref: f64) -> (f64, f64) {
    let n = samples.len() as f64;
    let mt = samples.iter().map(|s| s.t - t_ref).sum::<f64>() / n;
    let mz = samples.iter().map(|s| s.position.z).sum::<f64>() / n;
    let (mut stt, mut stz) = (0.0, 0.0);
    for s in samples {
        let dt = s.t - t_ref - mt;
        stt += dt * dt;
        stz += dt * (s.position.z - mz);
    }
    let b = if stt > 0.0 { stz / stt } else { 0.0 };
    (mz - b * mt, b)
}

fn sum_sq_residuals(samples: &[BallSample], t_ref: f64, a: f64, b: f64) -> f64 {
    samples
        .iter()
        .map(|s| (s.position.z - a - b * (s.t - t_ref)).powi(2))
        .sum()
}

fn descends_then_rises(fit: &(f64, f64, f64, f64, f64)) -> bool {
    fit.1 < 0.0 && fit.3 > 0.0
}

/// Landing point from the intersection of two first-order fits of height
/// over time, one over the `window` samples ending at the rebound sample and
/// one over the `window` samples after it.
///
/// The rebound sample is the lowest sample around which height falls before
/// and rises after. `x` and `y` are interpolated linearly between the two
/// samples bracketing the intersection time. The result is marked invalid
/// when the fits are near-parallel, the intersection leaves the bracketing
/// interval, or the point lies outside the relaxed table region.
pub fn estimate_landing(
    samples: &[BallSample],
    window: usize,
    region: &TableRegion,
) -> Result<LandingPoint> {
    let w = window.max(2);
    let n = samples.len();
    if n < 2 * w + 1 {
        return Err(Error::NoRebound);
    }
    let mut candidates: Vec<usize> = (w - 1..n - w).collect();
    candidates.sort_by(|&a, &b| {
        samples[a]
            .position
            .z
            .total_cmp(&samples[b].position.z)
            .then(a.cmp(&b))
    });
    let m = candidates
        .into_iter()
        .find(|&i| {
            let t_ref = samples[i].t;
            let (_, b1) = fit_line(&samples[i + 1 - w..=i], t_ref);
            let (_, b2) = fit_line(&samples[i + 1..=i + w], t_ref);
            b1 < 0.0 && b2 > 0.0
        })
        .ok_or(Error::NoRebound)?;

    // The lowest sample may already belong to the rising branch; use the
    // split of the two windows that the lines fit best.
    let t_ref = samples[m].t;
    let split = |last_before: usize| {
        let before = &samples[last_before + 1 - w..=last_before];
        let after = &samples[last_before + 1..=last_before + w];
        let (a1, b1) = fit_line(before, t_ref);
        let (a2, b2) = fit_line(after, t_ref);
        let sse = sum_sq_residuals(before, t_ref, a1, b1) + sum_sq_residuals(after, t_ref, a2, b2);
        (a1, b1, a2, b2, sse)
    };
    let mut best = split(m);
    if m >= w && descends_then_rises(&split(m - 1)) && split(m - 1).4 < best.4 {
        best = split(m - 1);
    }
    let (a1, b1, a2, b2, _) = best;
    let mut valid = (b2 - b1).abs() >= PARALLEL_TOLERANCE;
    let tau = if valid { (a1 - a2) / (b2 - b1) } else { 0.0 };
    let t_land = t_ref + tau;
    let lo = samples[m.saturating_sub(1)].t;
    let hi = samples[m + 1].t;
    if !(t_land >= lo && t_land <= hi) {
        valid = false;
    }
    let t_clamped = t_land.clamp(lo, hi);
    let (p, q) = if m > 0 && t_clamped < t_ref {
        (&samples[m - 1], &samples[m])
    } else {
        (&samples[m], &samples[m + 1])
    };
    let u = (t_clamped - p.t) / (q.t - p.t);
    let x = p.position.x + u * (q.position.x - p.position.x);
    let y = p.position.y + u * (q.position.y - p.position.y);
    if !region.in_relaxed(x, y) {
        valid = false;
    }
    Ok(LandingPoint {
        x,
        y,
        t_land,
        valid,
    })
}

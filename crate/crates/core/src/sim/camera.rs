//! Tracking-system model: irregular frame times, calibration error and
//! per-frame jitter, optional spurious detections.

use rand::Rng;
use rand_distr::{Distribution, Normal, UnitSphere};

use crate::lab::BallSample;
use crate::sim::config::CameraConfig;
use crate::sim::flight::Flight;
use crate::Vec3;

/// One recording session of the tracking system.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    cfg: CameraConfig,
    /// Per-axis scale error of this session's calibration (m/m).
    scale_error: Vec3,
}

impl CameraModel {
    /// Starts a session, drawing its calibration error.
    pub fn new<R: Rng + ?Sized>(cfg: &CameraConfig, rng: &mut R) -> Self {
        let mut scale_error = Vec3::zeros();
        for (e, sd) in scale_error.iter_mut().zip(cfg.noise_per_meter) {
            if sd > 0.0 {
                *e = Normal::new(0.0, sd).expect("finite sd").sample(rng);
            }
        }
        Self {
            cfg: cfg.clone(),
            scale_error,
        }
    }

    /// Session without any measurement error.
    pub fn perfect(cfg: &CameraConfig) -> Self {
        Self {
            cfg: cfg.clone(),
            scale_error: Vec3::zeros(),
        }
    }

    pub fn config(&self) -> &CameraConfig {
        &self.cfg
    }

    pub fn scale_error(&self) -> Vec3 {
        self.scale_error
    }

    /// Measured position of a ball at `p`.
    pub fn measure<R: Rng + ?Sized>(&self, p: &Vec3, rng: &mut R) -> Vec3 {
        let mut m = p + self.scale_error * p.norm();
        if self.cfg.jitter_sd > 0.0 {
            let n = Normal::new(0.0, self.cfg.jitter_sd).expect("finite sd");
            for c in m.iter_mut() {
                *c += n.sample(rng);
            }
        }
        if self.cfg.outlier_rate > 0.0 && rng.gen_bool(self.cfg.outlier_rate.min(1.0)) {
            let (lo, hi) = self.cfg.outlier_magnitude;
            let dir: [f64; 3] = UnitSphere.sample(rng);
            let mag = if hi > lo { rng.gen_range(lo..hi) } else { lo };
            m += Vec3::from(dir) * mag;
        }
        m
    }

    /// Time to the next frame (s).
    pub fn frame_interval<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let c = &self.cfg;
        let ms = if c.frame_sd_ms > 0.0 && c.frame_max_ms > c.frame_min_ms {
            let n = Normal::new(c.frame_mean_ms, c.frame_sd_ms).expect("finite sd");
            loop {
                let d = n.sample(rng);
                if d >= c.frame_min_ms && d <= c.frame_max_ms {
                    break d;
                }
            }
        } else {
            c.frame_mean_ms.clamp(c.frame_min_ms, c.frame_max_ms)
        };
        ms * 1e-3
    }

    /// Records a flight, shifting its time axis by `t_offset`. The first
    /// frame falls at a random phase within one mean frame interval.
    pub fn observe<R: Rng + ?Sized>(
        &self,
        flight: &Flight,
        t_offset: f64,
        rng: &mut R,
    ) -> Vec<BallSample> {
        let mut out = Vec::new();
        let mean = self.cfg.frame_mean_ms * 1e-3;
        let mut t = flight.start_time() + rng.gen_range(0.0..1.0) * mean;
        let end = flight.end_time();
        while t <= end {
            if let Some(p) = flight.position_at(t) {
                out.push(BallSample {
                    t: t + t_offset,
                    position: self.measure(&p, rng),
                });
            }
            t += self.frame_interval(rng);
        }
        out
    }
}

/// Records a flight in a fresh session.
pub fn observe<R: Rng + ?Sized>(flight: &Flight, cfg: &CameraConfig, rng: &mut R) -> Vec<BallSample> {
    CameraModel::new(cfg, rng).observe(flight, 0.0, rng)
}

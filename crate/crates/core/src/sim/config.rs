use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::TableRegion;
use crate::sim::motor::{MotorModel, MotorSet};

/// Physical and noise parameters of the simulated launcher.
///
/// Every field has a default, so a config file only needs the fields it
/// overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub motor_model: MotorModel,
    /// Curve CSV replacing the built-in curves of `motor_model`.
    pub motor_curves_csv: Option<PathBuf>,
    /// m
    pub wheel_radius: f64,
    /// m
    pub ball_radius: f64,
    /// kg
    pub ball_mass: f64,
    /// kg/m³
    pub air_density: f64,
    pub drag_coefficient: f64,
    pub magnus_coefficient: f64,
    /// m/s²
    pub gravity: f64,
    /// Vertical restitution at the table.
    pub restitution_z: f64,
    /// Fraction of horizontal velocity kept through the bounce.
    pub tangential_retention: f64,
    /// Speed gain c_v; computed by calibration when absent.
    pub calib_speed: Option<f64>,
    /// Spin gain c_ω; computed by calibration when absent.
    pub calib_spin: Option<f64>,
    /// Ball speed (m/s) of the equal-wheel full-actuation launch.
    pub max_ball_speed: f64,
    /// Spin (rev/s) of the maximum-differential launch.
    pub max_topspin: f64,
    /// Motor settling time constant τ (s).
    pub settle_time_constant: f64,
    /// Relative per-launch spread of τ for each motor.
    pub settle_jitter: f64,
    /// ESC actuation noise (percent, one sd).
    pub actuation_noise_sd: f64,
    /// Pinching diameter with the least launch noise (mm).
    pub pinch_optimum_mm: f64,
    /// Quadratic growth of the noise multiplier away from the optimum (1/mm²).
    pub pinch_noise_curvature: f64,
    /// Orientation repeatability of the actuators (deg, one sd per move).
    pub orientation_noise_sd_deg: f64,
    pub camera: CameraConfig,
    pub feed: FeedConfig,
    pub geometry: LauncherGeometry,
    pub table: TableRegion,
    /// Fixed integration step (s).
    pub integration_step: f64,
    /// Flight continues this long after the first table contact (s).
    pub post_contact_duration: f64,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            motor_model: MotorModel::Mn5008,
            motor_curves_csv: None,
            wheel_radius: 0.025,
            ball_radius: 0.020,
            ball_mass: 0.0027,
            air_density: 1.204,
            drag_coefficient: 0.40,
            magnus_coefficient: 1.0,
            gravity: 9.81,
            restitution_z: 0.87,
            tangential_retention: 0.75,
            calib_speed: None,
            calib_spin: None,
            max_ball_speed: 15.4,
            max_topspin: 192.0,
            settle_time_constant: 0.3,
            settle_jitter: 0.055,
            actuation_noise_sd: 0.065,
            pinch_optimum_mm: 37.0,
            pinch_noise_curvature: 0.15,
            orientation_noise_sd_deg: 0.05,
            camera: CameraConfig::default(),
            feed: FeedConfig::default(),
            geometry: LauncherGeometry::default(),
            table: TableRegion::default(),
            integration_step: 1e-3,
            post_contact_duration: 0.3,
            rng_seed: 0,
        }
    }
}

impl SimConfig {
    /// Config with every random disturbance switched off.
    pub fn noiseless() -> Self {
        Self {
            settle_jitter: 0.0,
            actuation_noise_sd: 0.0,
            orientation_noise_sd_deg: 0.0,
            camera: CameraConfig::noiseless(),
            ..Self::default()
        }
    }

    pub fn motor_set(&self) -> Result<MotorSet> {
        match &self.motor_curves_csv {
            Some(path) => MotorSet::from_csv_file(path),
            None => Ok(MotorSet::builtin(self.motor_model)),
        }
    }

    /// Launch noise multiplier for a pinching diameter, 1 at the optimum.
    pub fn pinch_noise_factor(&self, pinch_mm: f64) -> f64 {
        let d = pinch_mm - self.pinch_optimum_mm;
        1.0 + self.pinch_noise_curvature * d * d
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wheel_radius", self.wheel_radius),
            ("ball_radius", self.ball_radius),
            ("ball_mass", self.ball_mass),
            ("air_density", self.air_density),
            ("gravity", self.gravity),
            ("max_ball_speed", self.max_ball_speed),
            ("max_topspin", self.max_topspin),
            ("settle_time_constant", self.settle_time_constant),
            ("integration_step", self.integration_step),
            ("post_contact_duration", self.post_contact_duration),
            ("feed.tick", self.feed.tick),
            ("feed.full_stroke_deg", self.feed.full_stroke_deg),
            ("feed.deg_per_gain", self.feed.deg_per_gain),
            ("feed.max_step_deg", self.feed.max_step_deg),
            ("feed.refill_interval", self.feed.refill_interval),
            ("feed.stir_duration", self.feed.stir_duration),
            ("camera.frame_mean_ms", self.camera.frame_mean_ms),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parse(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("drag_coefficient", self.drag_coefficient),
            ("magnus_coefficient", self.magnus_coefficient),
            ("settle_jitter", self.settle_jitter),
            ("actuation_noise_sd", self.actuation_noise_sd),
            ("pinch_noise_curvature", self.pinch_noise_curvature),
            ("orientation_noise_sd_deg", self.orientation_noise_sd_deg),
            ("camera.jitter_sd", self.camera.jitter_sd),
            ("camera.frame_sd_ms", self.camera.frame_sd_ms),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Parse(format!("{name} must be >= 0, got {v}")));
            }
        }
        let unit = [
            ("restitution_z", self.restitution_z),
            ("tangential_retention", self.tangential_retention),
            ("camera.outlier_rate", self.camera.outlier_rate),
            ("feed.clog_probability", self.feed.clog_probability),
            ("feed.stir_success_probability", self.feed.stir_success_probability),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parse(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        if self.camera.noise_per_meter.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Parse("camera.noise_per_meter must be >= 0".into()));
        }
        let c = &self.camera;
        if !(c.frame_min_ms <= c.frame_mean_ms && c.frame_mean_ms <= c.frame_max_ms)
            || c.frame_min_ms <= 0.0
        {
            return Err(Error::Parse(
                "camera frame interval needs 0 < min <= mean <= max".into(),
            ));
        }
        if self.feed.capacity == 0 || self.feed.sensor_threshold == 0 {
            return Err(Error::Parse(
                "feed.capacity and feed.sensor_threshold must be >= 1".into(),
            ));
        }
        self.table.validate()
    }
}

/// Tracking camera model.
///
/// `noise_per_meter` is the calibration accuracy of the tracking system:
/// each recording session carries one per-axis scale error drawn with these
/// standard deviations and applied proportionally to the distance from the
/// origin. `jitter_sd` is independent per-frame noise on top of that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    /// m of deviation per m of distance, per axis (x, y, z).
    pub noise_per_meter: [f64; 3],
    /// m, per frame and axis.
    pub jitter_sd: f64,
    pub frame_mean_ms: f64,
    pub frame_sd_ms: f64,
    pub frame_min_ms: f64,
    pub frame_max_ms: f64,
    /// Probability that a frame is replaced by a spurious detection.
    pub outlier_rate: f64,
    /// Displacement range (m) of spurious detections.
    pub outlier_magnitude: (f64, f64),
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            noise_per_meter: [0.024, 0.011, 0.001],
            jitter_sd: 0.0015,
            frame_mean_ms: 5.5,
            frame_sd_ms: 0.25,
            frame_min_ms: 4.5,
            frame_max_ms: 6.5,
            outlier_rate: 0.0,
            outlier_magnitude: (0.1, 0.3),
        }
    }
}

impl CameraConfig {
    pub fn noiseless() -> Self {
        Self {
            noise_per_meter: [0.0; 3],
            jitter_sd: 0.0,
            outlier_rate: 0.0,
            ..Self::default()
        }
    }

    /// Equidistant frames at `rate_hz`.
    pub fn with_uniform_rate(mut self, rate_hz: f64) -> Self {
        let ms = 1000.0 / rate_hz;
        self.frame_mean_ms = ms;
        self.frame_min_ms = ms;
        self.frame_max_ms = ms;
        self.frame_sd_ms = 0.0;
        self
    }
}

/// Ball feed crank, supply channel and reservoir stirrer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeedConfig {
    /// Control tick of the crank servo (s).
    pub tick: f64,
    /// Crank angle at which the ball is pushed into the wheels (deg).
    pub full_stroke_deg: f64,
    /// Crank advance per tick per unit stroke gain (deg).
    pub deg_per_gain: f64,
    /// Servo slew limit per tick (deg).
    pub max_step_deg: f64,
    /// Balls the supply channel holds.
    pub capacity: u32,
    /// Balls initially queued.
    pub initial_queue: u32,
    /// Time for one ball to roll in from the reservoir (s).
    pub refill_interval: f64,
    /// The fill sensor sees a ball when at least this many are queued.
    pub sensor_threshold: u32,
    /// Chance that the reservoir clogs after a launch.
    pub clog_probability: f64,
    /// Duration of one stir attempt (s).
    pub stir_duration: f64,
    /// Chance that one stir attempt frees a clog.
    pub stir_success_probability: f64,
    /// Attempts after which a clog is always freed.
    pub stir_max_attempts: u32,
}

impl Default for FeedConfig {
    fn default() -> Self {
        // 0.10 gain needs 421 ticks and the slew limit gives 62 ticks, matching
        // the measured 4.21 s and 0.62 s actuation-to-launch times.
        Self {
            tick: 0.01,
            full_stroke_deg: 180.0,
            deg_per_gain: 180.0 / 42.1,
            max_step_deg: 180.0 / 62.0,
            capacity: 4,
            initial_queue: 4,
            refill_interval: 0.25,
            sensor_threshold: 2,
            clog_probability: 0.05,
            stir_duration: 0.4,
            stir_success_probability: 0.6,
            stir_max_attempts: 3,
        }
    }
}

/// Placement of the launch unit relative to the table frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LauncherGeometry {
    /// Distance of the pivot behind the table front edge (m).
    pub distance_to_table: f64,
    /// Pivot height above the table surface (m).
    pub pivot_height: f64,
    /// Pivot to tube exit (m).
    pub tube_length: f64,
}

impl Default for LauncherGeometry {
    fn default() -> Self {
        Self {
            distance_to_table: 0.8,
            pivot_height: 0.12,
            tube_length: 0.10,
        }
    }
}

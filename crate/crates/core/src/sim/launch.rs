//! Launch unit kinematics: motor spin-up, ball speed and spin from the three
//! wheel surface speeds, and the calibration of the two gains.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::config::SimConfig;
use crate::sim::motor::{MotorSet, Wheel};
use crate::sim::state::{LauncherState, WheelActuation};
use crate::Vec3;

/// Contact-normal angles of the wheels in the plane normal to the launch
/// axis, measured from the launcher's right towards up.
const WHEEL_ANGLES_DEG: [f64; 3] = [270.0, 150.0, 30.0];

/// Speed (m/s) and spin gains relating wheel surface speeds to the ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// c_v: ball speed per mean wheel surface speed.
    pub speed: f64,
    /// c_ω: spin (rev/s) per (m/s of surface speed differential / m of ball radius).
    pub spin: f64,
}

impl Calibration {
    /// Uses the gains stored in the config, calibrating any that are missing.
    pub fn resolve(cfg: &SimConfig, motors: &MotorSet) -> Result<Self> {
        match (cfg.calib_speed, cfg.calib_spin) {
            (Some(speed), Some(spin)) => Ok(Self { speed, spin }),
            (speed, spin) => {
                let c = calibrate(cfg, motors)?;
                Ok(Self {
                    speed: speed.unwrap_or(c.speed),
                    spin: spin.unwrap_or(c.spin),
                })
            }
        }
    }
}

/// Ball state right after leaving the tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaunchOutcome {
    /// m/s
    pub v0: Vec3,
    /// rev/s
    pub omega0: Vec3,
    /// m
    pub release_position: Vec3,
    /// Actuation to release (s).
    pub launch_delay: f64,
}

/// When the ball meets the wheels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaunchTiming {
    /// Time since the motors were started; infinite when running continuously.
    pub since_motor_start: f64,
    /// Actuation to release (s).
    pub launch_delay: f64,
}

impl LaunchTiming {
    pub fn steady(launch_delay: f64) -> Self {
        Self {
            since_motor_start: f64::INFINITY,
            launch_delay,
        }
    }
}

/// Random disturbances of one launch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaunchPerturbation {
    /// ESC signal offsets (percent) for bottom, top-left, top-right.
    pub esc_offset: [f64; 3],
    /// Multipliers on the settling time constant of each motor.
    pub tau_scale: [f64; 3],
    pub azimuth_offset_deg: f64,
    pub altitude_offset_deg: f64,
}

impl LaunchPerturbation {
    pub fn none() -> Self {
        Self {
            tau_scale: [1.0; 3],
            ..Self::default()
        }
    }

    /// Draws ESC and settling noise for one launch. Orientation offsets are
    /// left at zero; they belong to the orientation actuators, not the launch.
    pub fn sample<R: Rng + ?Sized>(cfg: &SimConfig, state: &LauncherState, rng: &mut R) -> Self {
        let mut p = Self::none();
        let sd = cfg.actuation_noise_sd * cfg.pinch_noise_factor(state.pinch_diameter_mm());
        if sd > 0.0 {
            let n = Normal::new(0.0, sd).expect("finite sd");
            for o in &mut p.esc_offset {
                *o = n.sample(rng);
            }
        }
        if cfg.settle_jitter > 0.0 {
            let n = Normal::new(0.0, cfg.settle_jitter).expect("finite sd");
            for s in &mut p.tau_scale {
                *s = f64::exp(n.sample(rng));
            }
        }
        p
    }
}

/// First-order spin-up: `target · (1 − e^(−t/τ))`. Pass `t = ∞` for motors
/// that are already running.
pub fn wheel_speed_at(t_since_start: f64, target_speed: f64, tau: f64) -> f64 {
    target_speed * (1.0 - (-t_since_start / tau).exp())
}

/// Unit vector of the launch axis.
pub fn launch_direction(azimuth_deg: f64, altitude_deg: f64) -> Vec3 {
    let (az, alt) = (azimuth_deg.to_radians(), altitude_deg.to_radians());
    Vec3::new(alt.cos() * az.cos(), alt.cos() * az.sin(), alt.sin())
}

/// Right and up directions of the plane normal to the launch axis.
fn wheel_plane(dir: &Vec3) -> (Vec3, Vec3) {
    let right = dir.cross(&Vec3::z()).normalize();
    let up = right.cross(dir);
    (right, up)
}

/// Surface speed (m/s) of a wheel turning at `rpm`.
pub fn surface_speed(wheel_radius: f64, rpm: f64) -> f64 {
    2.0 * PI * wheel_radius * rpm / 60.0
}

/// Mean of three speeds that is exact when all three are equal.
fn mean3(u: &[f64; 3]) -> f64 {
    u[0] + ((u[1] - u[0]) + (u[2] - u[0])) / 3.0
}

/// Unscaled spin vector `Σ (u_i − ū) (r̂_i × d)` in m/s. Each wheel faster
/// than the mean drags its side of the ball forward, so spin points along
/// `r̂_i × d`: faster top wheels give topspin.
fn differential_spin(u: &[f64; 3], dir: &Vec3) -> Vec3 {
    let mean = mean3(u);
    let (right, up) = wheel_plane(dir);
    let mut acc = Vec3::zeros();
    for (ui, angle) in u.iter().zip(WHEEL_ANGLES_DEG) {
        let dev = ui - mean;
        if dev != 0.0 {
            let a = angle.to_radians();
            let normal = right * a.cos() + up * a.sin();
            acc += normal.cross(dir) * dev;
        }
    }
    acc
}

/// Ball velocity, spin and release point for a launch.
pub fn compute_launch(
    state: &LauncherState,
    cfg: &SimConfig,
    motors: &MotorSet,
    calib: &Calibration,
    timing: LaunchTiming,
    perturbation: &LaunchPerturbation,
) -> Result<LaunchOutcome> {
    if !(timing.launch_delay > 0.0) {
        return Err(Error::OutOfRange {
            what: "launch_delay",
            value: timing.launch_delay,
            min: f64::MIN_POSITIVE,
            max: f64::INFINITY,
        });
    }
    let actuation = state.wheels().as_array();
    let mut u = [0.0; 3];
    for (i, wheel) in Wheel::ALL.into_iter().enumerate() {
        let target = motors.target_speed(actuation[i])?;
        let commanded = if perturbation.esc_offset[i] == 0.0 {
            target
        } else {
            motors.perturbed_speed(wheel, target, perturbation.esc_offset[i])
        };
        let tau = cfg.settle_time_constant * perturbation.tau_scale[i];
        let rpm = wheel_speed_at(timing.since_motor_start, commanded, tau);
        u[i] = surface_speed(cfg.wheel_radius, rpm);
    }

    let dir = launch_direction(
        state.azimuth_deg() + perturbation.azimuth_offset_deg,
        state.altitude_deg() + perturbation.altitude_offset_deg,
    );
    let speed = calib.speed * mean3(&u);
    let omega0 = differential_spin(&u, &dir) * (calib.spin / cfg.ball_radius);

    let g = &cfg.geometry;
    let pivot = Vec3::new(
        -g.distance_to_table,
        0.0,
        cfg.table.height + g.pivot_height,
    );
    Ok(LaunchOutcome {
        v0: dir * speed,
        omega0,
        release_position: pivot + dir * g.tube_length,
        launch_delay: timing.launch_delay,
    })
}

/// Gains such that the equal-wheel full-actuation launch reaches
/// `cfg.max_ball_speed` and bottom 0 % / top 100 % reaches `cfg.max_topspin`.
pub fn calibrate(cfg: &SimConfig, motors: &MotorSet) -> Result<Calibration> {
    let full = surface_speed(cfg.wheel_radius, motors.target_speed(100.0)?);
    if !(full > 0.0) {
        return Err(Error::Calibration(
            "motor curves give zero speed at full actuation".into(),
        ));
    }
    let speed = cfg.max_ball_speed / mean3(&[full; 3]);

    let spin_config = spin_calibration_state();
    let u = spin_config
        .wheels()
        .as_array()
        .map(|a| surface_speed(cfg.wheel_radius, motors.target_speed(a).unwrap_or(0.0)));
    let dir = launch_direction(spin_config.azimuth_deg(), spin_config.altitude_deg());
    let raw = differential_spin(&u, &dir).norm() / cfg.ball_radius;
    if !(raw > 0.0) {
        return Err(Error::Calibration(
            "maximum-differential configuration produces no spin".into(),
        ));
    }
    Ok(Calibration {
        speed,
        spin: cfg.max_topspin / raw,
    })
}

/// Wheel setting used as the topspin calibration anchor.
pub fn spin_calibration_state() -> LauncherState {
    LauncherState::default()
        .with_wheels(WheelActuation::new(0.0, 100.0, 100.0))
        .expect("valid actuation")
}

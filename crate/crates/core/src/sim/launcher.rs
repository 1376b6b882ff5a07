//! The complete simulated launcher: state, motors, launch, flight and
//! observation behind one seeded random stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::lab::BallSample;
use crate::sim::camera::CameraModel;
use crate::sim::config::SimConfig;
use crate::sim::feed::stroke_time;
use crate::sim::flight::{Flight, FlightModel};
use crate::sim::launch::{
    compute_launch, Calibration, LaunchOutcome, LaunchPerturbation, LaunchTiming,
};
use crate::sim::motor::MotorSet;
use crate::sim::state::{LauncherState, RampUp, WheelActuation};

/// Everything produced by one launch.
#[derive(Debug, Clone, PartialEq)]
pub struct Shot {
    pub state: LauncherState,
    pub outcome: LaunchOutcome,
    pub flight: Flight,
    /// Tracking-system samples; time 0 is the release.
    pub observed: Vec<BallSample>,
}

/// Seeded software launcher. Identical config, seed and call sequence give
/// bit-identical shots.
#[derive(Debug, Clone)]
pub struct SimLauncher {
    cfg: SimConfig,
    motors: MotorSet,
    calib: Calibration,
    flight_model: FlightModel,
    camera: CameraModel,
    state: LauncherState,
    orientation_offset: (f64, f64),
    rng: ChaCha8Rng,
}

impl SimLauncher {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        let seed = cfg.rng_seed;
        Self::with_seed(cfg, seed)
    }

    pub fn with_seed(cfg: SimConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let motors = cfg.motor_set()?;
        let calib = Calibration::resolve(&cfg, &motors)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let camera = CameraModel::new(&cfg.camera, &mut rng);
        let mut launcher = Self {
            flight_model: FlightModel::from_config(&cfg),
            cfg,
            motors,
            calib,
            camera,
            state: LauncherState::default(),
            orientation_offset: (0.0, 0.0),
            rng,
        };
        launcher.draw_orientation_offset();
        Ok(launcher)
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn motors(&self) -> &MotorSet {
        &self.motors
    }

    pub fn calibration(&self) -> Calibration {
        self.calib
    }

    pub fn state(&self) -> &LauncherState {
        &self.state
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    /// Starts a new tracking session with a fresh calibration error.
    pub fn new_camera_session(&mut self) {
        self.camera = CameraModel::new(&self.cfg.camera, &mut self.rng);
    }

    fn draw_orientation_offset(&mut self) {
        let sd = self.cfg.orientation_noise_sd_deg;
        self.orientation_offset = if sd > 0.0 {
            let n = Normal::new(0.0, sd).expect("finite sd");
            (n.sample(&mut self.rng), n.sample(&mut self.rng))
        } else {
            (0.0, 0.0)
        };
    }

    /// Replaces the whole state. Moving the orientation re-seats the
    /// actuators with a fresh repeatability error.
    pub fn set_state(&mut self, state: LauncherState) -> Result<()> {
        state.validate()?;
        let moved = state.azimuth_deg() != self.state.azimuth_deg()
            || state.altitude_deg() != self.state.altitude_deg();
        self.state = state;
        if moved {
            self.draw_orientation_offset();
        }
        Ok(())
    }

    pub fn set_wheels(&mut self, wheels: WheelActuation) -> Result<()> {
        self.state.set_wheels(wheels)
    }

    pub fn set_orientation(&mut self, azimuth_deg: f64, altitude_deg: f64) -> Result<()> {
        let next = self.state.with_orientation(azimuth_deg, altitude_deg)?;
        self.set_state(next)
    }

    /// Feed start to release for the current stroke gain (s).
    pub fn stroke_time(&self) -> f64 {
        stroke_time(&self.cfg.feed, self.state.stroke_gain())
    }

    /// Launch request to release for the current state (s).
    pub fn launch_delay(&self) -> f64 {
        self.state.ramp_up_time().delay() + self.stroke_time()
    }

    fn timing(&self) -> LaunchTiming {
        let delay = self.launch_delay();
        match self.state.ramp_up_time() {
            RampUp::Continuous => LaunchTiming::steady(delay),
            RampUp::Seconds(_) => LaunchTiming {
                since_motor_start: delay,
                launch_delay: delay,
            },
        }
    }

    /// Ball state at release for the current state, with fresh launch noise.
    pub fn launch_outcome(&mut self) -> Result<LaunchOutcome> {
        let mut p = LaunchPerturbation::sample(&self.cfg, &self.state, &mut self.rng);
        p.azimuth_offset_deg = self.orientation_offset.0;
        p.altitude_offset_deg = self.orientation_offset.1;
        compute_launch(
            &self.state,
            &self.cfg,
            &self.motors,
            &self.calib,
            self.timing(),
            &p,
        )
    }

    /// Launch at the current state: noise, flight and observation.
    pub fn fire(&mut self) -> Result<Shot> {
        let outcome = self.launch_outcome()?;
        let flight = self.flight_model.integrate(
            0.0,
            outcome.release_position,
            outcome.v0,
            outcome.omega0,
        )?;
        let observed = self.camera.observe(&flight, 0.0, &mut self.rng);
        Ok(Shot {
            state: self.state,
            outcome,
            flight,
            observed,
        })
    }

    /// Noise-free launch of `state` (no ESC, settling, orientation or camera
    /// error); the launcher's own state and random stream are untouched.
    pub fn ideal_flight(&self, state: &LauncherState) -> Result<Flight> {
        let outcome = compute_launch(
            state,
            &self.cfg,
            &self.motors,
            &self.calib,
            LaunchTiming::steady(stroke_time(&self.cfg.feed, state.stroke_gain())),
            &LaunchPerturbation::none(),
        )?;
        self.flight_model
            .integrate(0.0, outcome.release_position, outcome.v0, outcome.omega0)
    }
}

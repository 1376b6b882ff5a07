//! Simulated launcher hardware and ball flight.

pub mod camera;
pub mod config;
pub mod feed;
pub mod flight;
pub mod launch;
pub mod launcher;
pub mod motor;
pub mod state;

pub use camera::{observe, CameraModel};
pub use config::{CameraConfig, FeedConfig, LauncherGeometry, SimConfig};
pub use feed::{step_feed, stroke_time, FeedEvent, FeedSim, FeedState};
pub use flight::{simulate_flight, Contact, Flight, FlightModel, FlightSample};
pub use launch::{
    calibrate, compute_launch, launch_direction, wheel_speed_at, Calibration, LaunchOutcome,
    LaunchPerturbation, LaunchTiming,
};
pub use launcher::{Shot, SimLauncher};
pub use motor::{interpolate_motor_speed, MotorCurve, MotorModel, MotorSet, Wheel};
pub use state::{LauncherState, RampUp, WheelActuation};

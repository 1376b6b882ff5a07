//! Hardware abstraction the controller drives.

use std::time::Duration;

use launcher_core::lab::{process_trajectory, BallSample, PipelineConfig, Trajectory};
use launcher_core::sim::{
    stroke_time, FeedEvent, FeedSim, FeedState, LauncherState, SimConfig, SimLauncher,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What the tracking system saw of a released ball.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LaunchData {
    pub landing: Option<[f64; 2]>,
    pub trajectory: Vec<BallSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendEvent {
    Released(LaunchData),
    ClogResolved,
    StirFinished,
}

/// No ball was queued when the feed started.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Starved;

/// Launcher hardware as seen by the controller. Owned by a single task.
pub trait Backend: Send + 'static {
    /// Moves the actuators to `state`. Rejected states leave the hardware
    /// unchanged.
    fn apply_state(&mut self, state: &LauncherState) -> launcher_core::Result<()>;
    /// Spins the wheels up to the commanded speeds.
    fn start_ramp(&mut self);
    /// Starts a crank stroke.
    fn start_feed(&mut self) -> Result<(), Starved>;
    /// Advances the feed by one control tick.
    fn feed_tick(&mut self) -> Vec<BackendEvent>;
    /// Ball present at the channel fill sensor.
    fn read_sensor(&self) -> bool;
    fn stir(&mut self);
    fn is_stirring(&self) -> bool;
    fn feed_state(&self) -> FeedState;
    /// Feed start to release at a stroke gain (s).
    fn stroke_time(&self, stroke_gain: f64) -> f64;
    fn tick(&self) -> Duration;
}

/// Simulated launcher and feed behind one seed.
#[derive(Debug, Clone)]
pub struct SimBackend {
    launcher: SimLauncher,
    feed: FeedSim,
    rng: ChaCha8Rng,
    pipeline: PipelineConfig,
    released: u64,
}

impl SimBackend {
    pub fn new(cfg: SimConfig) -> launcher_core::Result<Self> {
        let seed = cfg.rng_seed;
        let feed = FeedSim::new(&cfg.feed);
        let pipeline = PipelineConfig {
            contact_height: cfg.table.height + cfg.ball_radius,
            region: cfg.table.clone(),
            ..PipelineConfig::default()
        };
        Ok(Self {
            launcher: SimLauncher::with_seed(cfg, seed)?,
            feed,
            // separate stream so feed randomness does not shift launch noise
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d),
            pipeline,
            released: 0,
        })
    }

    /// Direct access to the feed, for fault injection.
    pub fn feed_mut(&mut self) -> &mut FeedSim {
        &mut self.feed
    }

    pub fn launcher(&self) -> &SimLauncher {
        &self.launcher
    }

    fn release(&mut self) -> LaunchData {
        self.released += 1;
        let shot = match self.launcher.fire() {
            Ok(s) => s,
            Err(e) => {
                tracing::warn!("simulated launch failed: {e}");
                return LaunchData::default();
            }
        };
        let distance = self.launcher.config().geometry.distance_to_table;
        let landing = Trajectory::new(
            format!("live-{}", self.released),
            shot.observed.clone(),
            Some(shot.state),
            distance,
        )
        .ok()
        .and_then(|t| process_trajectory(&t, &self.pipeline).0)
        .map(|l| [l.x, l.y]);
        LaunchData {
            landing,
            trajectory: shot.observed,
        }
    }
}

impl Backend for SimBackend {
    fn apply_state(&mut self, state: &LauncherState) -> launcher_core::Result<()> {
        self.launcher.set_state(*state)
    }

    fn start_ramp(&mut self) {}

    fn start_feed(&mut self) -> Result<(), Starved> {
        match self.feed.start_feed() {
            Some(FeedEvent::FeedStarved) => Err(Starved),
            _ => Ok(()),
        }
    }

    fn feed_tick(&mut self) -> Vec<BackendEvent> {
        let gain = self.launcher.state().stroke_gain();
        let events = self.feed.tick(gain, &mut self.rng);
        events
            .into_iter()
            .filter_map(|e| match e {
                FeedEvent::BallReleased => Some(BackendEvent::Released(self.release())),
                FeedEvent::ClogResolved => Some(BackendEvent::ClogResolved),
                FeedEvent::StirFinished => Some(BackendEvent::StirFinished),
                FeedEvent::FeedStarved => None,
            })
            .collect()
    }

    fn read_sensor(&self) -> bool {
        self.feed.sensor_filled()
    }

    fn stir(&mut self) {
        self.feed.start_stir();
    }

    fn is_stirring(&self) -> bool {
        self.feed.is_stirring()
    }

    fn feed_state(&self) -> FeedState {
        self.feed.state()
    }

    fn stroke_time(&self, stroke_gain: f64) -> f64 {
        stroke_time(self.feed.config(), stroke_gain)
    }

    fn tick(&self) -> Duration {
        Duration::from_secs_f64(self.feed.config().tick)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn release_reports_a_landing() {
        let mut b = SimBackend::new(SimConfig::default()).unwrap();
        let state = LauncherState::default();
        b.apply_state(&state).unwrap();
        b.start_feed().unwrap();
        let ticks = (b.stroke_time(state.stroke_gain()) / b.tick().as_secs_f64()).round() as usize;
        let mut released = None;
        for i in 1..=ticks {
            for e in b.feed_tick() {
                if let BackendEvent::Released(d) = e {
                    released = Some((i, d));
                }
            }
        }
        let (i, data) = released.expect("ball released");
        assert_eq!(i, ticks);
        assert!(!data.trajectory.is_empty());
        let [x, y] = data.landing.expect("default state lands on the table");
        assert!(x > 0.0 && x < 2.74 && y.abs() < 0.7625, "{x} {y}");
    }

    #[test]
    fn empty_channel_starves() {
        let mut b = SimBackend::new(SimConfig::default()).unwrap();
        b.feed_mut().set_queue(0);
        b.feed_mut().set_clogged(true);
        assert!(!b.read_sensor());
        assert_eq!(b.start_feed(), Err(Starved));
    }
}

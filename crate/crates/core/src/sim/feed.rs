//! Ball feed: crank stroke, supply channel queue, reservoir clogging and the
//! stirrer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::sim::config::FeedConfig;

/// Observable state of the feeding system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedState {
    pub queue_length: u32,
    pub clogged: bool,
    pub stroke_angle: f64,
    pub sensor_filled: bool,
}

/// Something the feed reports to its owner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedEvent {
    BallReleased,
    FeedStarved,
    ClogResolved,
    StirFinished,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Stir {
    remaining: f64,
}

/// Single-owner state machine of the feeding system, advanced in control
/// ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedSim {
    cfg: FeedConfig,
    queue: u32,
    clogged: bool,
    angle: f64,
    feeding: bool,
    refill_timer: f64,
    stir: Option<Stir>,
    failed_stirs: u32,
}

/// Crank advance per tick for a stroke gain (deg).
pub fn stroke_step_deg(cfg: &FeedConfig, stroke_gain: f64) -> f64 {
    (stroke_gain * cfg.deg_per_gain).min(cfg.max_step_deg)
}

/// Control ticks from feed start to ball release.
pub fn stroke_ticks(cfg: &FeedConfig, stroke_gain: f64) -> u64 {
    let step = stroke_step_deg(cfg, stroke_gain);
    let mut angle = 0.0;
    let mut n = 0;
    while angle < cfg.full_stroke_deg - 1e-9 {
        angle += step;
        n += 1;
    }
    n
}

/// Feed start to ball release (s).
pub fn stroke_time(cfg: &FeedConfig, stroke_gain: f64) -> f64 {
    stroke_ticks(cfg, stroke_gain) as f64 * cfg.tick
}

impl FeedSim {
    pub fn new(cfg: &FeedConfig) -> Self {
        Self {
            cfg: cfg.clone(),
            queue: cfg.initial_queue.min(cfg.capacity),
            clogged: false,
            angle: 0.0,
            feeding: false,
            refill_timer: 0.0,
            stir: None,
            failed_stirs: 0,
        }
    }

    pub fn config(&self) -> &FeedConfig {
        &self.cfg
    }

    pub fn state(&self) -> FeedState {
        FeedState {
            queue_length: self.queue,
            clogged: self.clogged,
            stroke_angle: self.angle,
            sensor_filled: self.sensor_filled(),
        }
    }

    pub fn sensor_filled(&self) -> bool {
        self.queue >= self.cfg.sensor_threshold.max(1)
    }

    pub fn is_feeding(&self) -> bool {
        self.feeding
    }

    pub fn is_stirring(&self) -> bool {
        self.stir.is_some()
    }

    /// Forces the reservoir into the clogged state.
    pub fn set_clogged(&mut self, clogged: bool) {
        self.clogged = clogged;
    }

    /// Empties or fills the supply channel.
    pub fn set_queue(&mut self, n: u32) {
        self.queue = n.min(self.cfg.capacity);
    }

    /// Begins a stroke. Reports starvation instead when no ball is queued.
    pub fn start_feed(&mut self) -> Option<FeedEvent> {
        if self.queue == 0 {
            return Some(FeedEvent::FeedStarved);
        }
        self.feeding = true;
        self.angle = 0.0;
        None
    }

    /// Starts a stir attempt unless one is running.
    pub fn start_stir(&mut self) {
        if self.stir.is_none() {
            self.stir = Some(Stir {
                remaining: self.cfg.stir_duration,
            });
        }
    }

    /// Advances one control tick.
    pub fn tick<R: Rng + ?Sized>(&mut self, stroke_gain: f64, rng: &mut R) -> Vec<FeedEvent> {
        let mut events = Vec::new();
        let dt = self.cfg.tick;

        if self.feeding {
            self.angle += stroke_step_deg(&self.cfg, stroke_gain);
            if self.angle >= self.cfg.full_stroke_deg - 1e-9 {
                self.angle = 0.0;
                self.feeding = false;
                self.queue = self.queue.saturating_sub(1);
                if !self.clogged && rng.gen_bool(self.cfg.clog_probability.clamp(0.0, 1.0)) {
                    self.clogged = true;
                }
                events.push(FeedEvent::BallReleased);
            }
        }

        if let Some(stir) = &mut self.stir {
            stir.remaining -= dt;
            if stir.remaining <= 1e-12 {
                self.stir = None;
                if self.clogged {
                    let forced = self.failed_stirs + 1 >= self.cfg.stir_max_attempts;
                    if forced || rng.gen_bool(self.cfg.stir_success_probability.clamp(0.0, 1.0)) {
                        self.clogged = false;
                        self.failed_stirs = 0;
                        events.push(FeedEvent::ClogResolved);
                    } else {
                        self.failed_stirs += 1;
                    }
                }
                events.push(FeedEvent::StirFinished);
            }
        }

        if self.clogged || self.queue >= self.cfg.capacity {
            self.refill_timer = 0.0;
        } else {
            self.refill_timer += dt;
            if self.refill_timer >= self.cfg.refill_interval - 1e-12 {
                self.refill_timer = 0.0;
                self.queue += 1;
            }
        }
        events
    }
}

/// One tick of the feed as a value-level transition.
pub fn step_feed<R: Rng + ?Sized>(
    feed: &FeedSim,
    stroke_gain: f64,
    rng: &mut R,
) -> (FeedSim, Option<FeedEvent>) {
    let mut next = feed.clone();
    let ev = next
        .tick(stroke_gain, rng)
        .into_iter()
        .find(|e| *e == FeedEvent::BallReleased);
    (next, ev)
}

//! The single task that owns the backend. Sessions and timers talk to it
//! through an ordered queue, so every state change is serialized.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use launcher_client::{Command, Event, Notification, Request, Response, Snapshot, StirReason};
use launcher_core::sim::{LauncherState, WheelActuation};
use tokio::sync::{broadcast, mpsc, oneshot, watch};
use tokio::task::JoinHandle;
use tokio::time::{self, Instant, MissedTickBehavior};

use crate::backend::{Backend, BackendEvent, LaunchData};
use crate::config::StirPolicy;

/// Supervision loop period.
pub const SUPERVISION_PERIOD: Duration = Duration::from_millis(100);
/// Consecutive empty sensor readings before the supervisor stirs.
pub const EMPTY_TICKS_BEFORE_STIR: u32 = 2;

const QUEUE_DEPTH: usize = 1024;
const NOTIFY_DEPTH: usize = 1024;

struct Call {
    request: Request,
    reply: oneshot::Sender<Response>,
}

/// Cheap cloneable access to the controller.
#[derive(Debug, Clone)]
pub struct ControllerHandle {
    tx: mpsc::Sender<Call>,
    notify: broadcast::Sender<Notification>,
    snapshot: watch::Receiver<Snapshot>,
    stopped: watch::Receiver<bool>,
    next_id: Arc<AtomicU64>,
}

impl ControllerHandle {
    /// Submits a request; `None` once the controller has stopped.
    pub async fn call(&self, request: Request) -> Option<Response> {
        let (reply, rx) = oneshot::channel();
        self.tx.send(Call { request, reply }).await.ok()?;
        rx.await.ok()
    }

    /// Submits a command under a handle-local id.
    pub async fn request(&self, command: Command) -> Option<Response> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        self.call(Request { id, command }).await
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Notification> {
        self.notify.subscribe()
    }

    pub fn snapshot(&self) -> Snapshot {
        self.snapshot.borrow().clone()
    }

    /// Flips to `true` when the controller stops.
    pub fn stopped(&self) -> watch::Receiver<bool> {
        self.stopped.clone()
    }

    pub fn is_stopped(&self) -> bool {
        *self.stopped.borrow()
    }
}

#[derive(Debug, Clone, Copy)]
struct Planned {
    request_id: u64,
    start_at: Instant,
    release_at: Instant,
    best_effort: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Ramping { feed_at: Instant },
    Feeding,
}

#[derive(Debug, Clone, Copy)]
struct Active {
    plan: Planned,
    phase: Phase,
}

struct Controller<B> {
    backend: B,
    state: LauncherState,
    stir: StirPolicy,
    t0: Instant,
    active: Option<Active>,
    planned: VecDeque<Planned>,
    empty_ticks: u32,
    launches: u64,
    notify: broadcast::Sender<Notification>,
    snapshot: watch::Sender<Snapshot>,
}

/// Starts the controller on the current runtime. The backend is brought to
/// `state` first.
pub fn spawn<B: Backend>(
    mut backend: B,
    state: LauncherState,
    stir: StirPolicy,
) -> launcher_core::Result<(ControllerHandle, JoinHandle<()>)> {
    backend.apply_state(&state)?;
    let (tx, rx) = mpsc::channel(QUEUE_DEPTH);
    let (notify, _) = broadcast::channel(NOTIFY_DEPTH);
    let t0 = Instant::now();
    let first = Snapshot {
        state,
        feed: backend.feed_state(),
        t_monotonic_s: 0.0,
        launch_active: false,
        launches_scheduled: 0,
        stirring: backend.is_stirring(),
        launches: 0,
    };
    let (snap_tx, snap_rx) = watch::channel(first);
    let (stop_tx, stop_rx) = watch::channel(false);
    let ctrl = Controller {
        backend,
        state,
        stir,
        t0,
        active: None,
        planned: VecDeque::new(),
        empty_ticks: 0,
        launches: 0,
        notify: notify.clone(),
        snapshot: snap_tx,
    };
    let task = tokio::spawn(async move {
        ctrl.run(rx).await;
        let _ = stop_tx.send(true);
    });
    let handle = ControllerHandle {
        tx,
        notify,
        snapshot: snap_rx,
        stopped: stop_rx,
        next_id: Arc::new(AtomicU64::new(1)),
    };
    Ok((handle, task))
}

impl<B: Backend> Controller<B> {
    async fn run(mut self, mut rx: mpsc::Receiver<Call>) {
        let mut feed = time::interval_at(self.t0 + self.backend.tick(), self.backend.tick());
        feed.set_missed_tick_behavior(MissedTickBehavior::Burst);
        let mut supervise = time::interval_at(self.t0 + SUPERVISION_PERIOD, SUPERVISION_PERIOD);
        supervise.set_missed_tick_behavior(MissedTickBehavior::Delay);
        loop {
            tokio::select! {
                biased;
                call = rx.recv() => {
                    let Some(call) = call else { break };
                    let stop = matches!(call.request.command, Command::Shutdown);
                    let resp = self.handle(call.request);
                    let _ = call.reply.send(resp);
                    self.publish();
                    if stop {
                        break;
                    }
                }
                now = feed.tick() => {
                    self.on_feed_tick(now);
                    self.publish();
                }
                now = supervise.tick() => self.on_supervision(now),
            }
        }
        // answer whatever is still queued so no session waits forever
        rx.close();
        while let Ok(call) = rx.try_recv() {
            let mut resp = self.response(Some(call.request.id));
            resp.ok = false;
            resp.error = Some("server is shutting down".into());
            let _ = call.reply.send(resp);
        }
    }

    fn secs(&self, t: Instant) -> f64 {
        t.saturating_duration_since(self.t0).as_secs_f64()
    }

    fn response(&self, id: Option<u64>) -> Response {
        Response {
            id,
            ok: true,
            state: self.state,
            feed: self.backend.feed_state(),
            t_monotonic_s: self.secs(Instant::now()),
            event: None,
            error: None,
        }
    }

    fn emit(&self, event: Event) {
        let _ = self.notify.send(Notification {
            event,
            state: self.state,
            t_monotonic_s: self.secs(Instant::now()),
        });
    }

    fn publish(&self) {
        self.snapshot.send_replace(Snapshot {
            state: self.state,
            feed: self.backend.feed_state(),
            t_monotonic_s: self.secs(Instant::now()),
            launch_active: self.active.is_some(),
            launches_scheduled: self.planned.len(),
            stirring: self.backend.is_stirring(),
            launches: self.launches,
        });
    }

    fn handle(&mut self, req: Request) -> Response {
        let id = req.id;
        match self.execute(id, req.command) {
            Ok(event) => {
                let mut r = self.response(Some(id));
                r.event = event;
                r
            }
            Err(msg) => {
                let mut r = self.response(Some(id));
                r.ok = false;
                r.error = Some(msg);
                r
            }
        }
    }

    fn commit(&mut self, next: LauncherState) -> Result<(), String> {
        self.backend.apply_state(&next).map_err(|e| e.to_string())?;
        self.state = next;
        Ok(())
    }

    fn execute(&mut self, id: u64, command: Command) -> Result<Option<Event>, String> {
        let err = |e: launcher_core::Error| e.to_string();
        match command {
            Command::Ping | Command::GetState | Command::Shutdown => Ok(None),
            Command::SetWheels {
                bottom,
                top_left,
                top_right,
            } => {
                let next = self
                    .state
                    .with_wheels(WheelActuation::new(bottom, top_left, top_right))
                    .map_err(err)?;
                self.commit(next).map(|_| None)
            }
            Command::SetOrientation {
                azimuth_deg,
                altitude_deg,
            } => {
                let next = self
                    .state
                    .with_orientation(azimuth_deg, altitude_deg)
                    .map_err(err)?;
                self.commit(next).map(|_| None)
            }
            Command::Configure {
                stroke_gain,
                ramp_up_time,
                pinch_diameter_mm,
            } => {
                let mut next = self.state;
                if let Some(g) = stroke_gain {
                    next.set_stroke_gain(g).map_err(err)?;
                }
                if let Some(r) = ramp_up_time {
                    next.set_ramp_up_time(r).map_err(err)?;
                }
                if let Some(d) = pinch_diameter_mm {
                    next.set_pinch_diameter_mm(d).map_err(err)?;
                }
                self.commit(next).map(|_| None)
            }
            Command::Launch => Ok(Some(self.plan(id, None))),
            Command::LaunchAt {
                t_monotonic_s,
                t_unix_s,
            } => {
                let now = Instant::now();
                let target = match (t_monotonic_s, t_unix_s) {
                    (Some(t), None) => t,
                    (None, Some(u)) => {
                        let unix_now = SystemTime::now()
                            .duration_since(UNIX_EPOCH)
                            .map_err(|e| e.to_string())?
                            .as_secs_f64();
                        self.secs(now) + (u - unix_now)
                    }
                    _ => return Err("launch_at needs exactly one of t_monotonic_s, t_unix_s".into()),
                };
                if !target.is_finite() || target < self.secs(now) {
                    return Err(format!(
                        "target time {target} s is in the past (now {:.3} s)",
                        self.secs(now)
                    ));
                }
                Ok(Some(self.plan(id, Some(self.t0 + Duration::from_secs_f64(target)))))
            }
            Command::Stir => {
                self.backend.stir();
                Ok(Some(Event::StirStarted {
                    t: self.secs(Instant::now()),
                    reason: StirReason::Request,
                }))
            }
        }
    }

    fn launch_delay(&self) -> Duration {
        Duration::from_secs_f64(
            self.state.ramp_up_time().delay() + self.backend.stroke_time(self.state.stroke_gain()),
        )
    }

    /// Queues a launch behind any earlier one. Without a target it starts
    /// as soon as possible; with one, the ramp starts one launch delay
    /// ahead of it, or as soon as possible with `best_effort` when that
    /// is already too late.
    fn plan(&mut self, request_id: u64, target: Option<Instant>) -> Event {
        let now = Instant::now();
        let delay = self.launch_delay();
        let free_at = self
            .planned
            .back()
            .map(|p| p.release_at)
            .or(self.active.map(|a| a.plan.release_at))
            .map_or(now, |t| t.max(now));
        let (start_at, best_effort) = match target {
            None => (free_at, false),
            Some(t) => match t.checked_sub(delay) {
                Some(s) if s >= free_at => (s, false),
                _ => (free_at, true),
            },
        };
        let plan = Planned {
            request_id,
            start_at,
            release_at: start_at + delay,
            best_effort,
        };
        self.planned.push_back(plan);
        Event::Scheduled {
            request_id,
            t_release_s: self.secs(plan.release_at),
            best_effort,
        }
    }

    fn on_feed_tick(&mut self, now: Instant) {
        for ev in self.backend.feed_tick() {
            match ev {
                BackendEvent::Released(data) => self.on_release(now, data),
                BackendEvent::ClogResolved => self.emit(Event::ClogResolved { t: self.secs(now) }),
                BackendEvent::StirFinished => {}
            }
        }
        if self.active.is_none() {
            if let Some(p) = self.planned.front().copied().filter(|p| p.start_at <= now) {
                self.planned.pop_front();
                self.backend.start_ramp();
                let feed_at = now + Duration::from_secs_f64(self.state.ramp_up_time().delay());
                self.active = Some(Active {
                    plan: p,
                    phase: Phase::Ramping { feed_at },
                });
            }
        }
        if let Some(a) = self.active {
            if let Phase::Ramping { feed_at } = a.phase {
                if feed_at <= now {
                    match self.backend.start_feed() {
                        Ok(()) => {
                            self.active = Some(Active {
                                phase: Phase::Feeding,
                                ..a
                            })
                        }
                        Err(_) => {
                            self.active = None;
                            self.emit(Event::FeedStarved {
                                request_id: a.plan.request_id,
                                t: self.secs(now),
                            });
                        }
                    }
                }
            }
        }
    }

    fn on_release(&mut self, now: Instant, data: LaunchData) {
        let Some(a) = self.active.take() else {
            tracing::warn!("ball released without an active launch");
            return;
        };
        self.launches += 1;
        self.emit(Event::Launched {
            request_id: a.plan.request_id,
            t: self.secs(now),
            best_effort: a.plan.best_effort,
            landing: data.landing,
            trajectory: data.trajectory,
        });
        if self.stir.after_launch && !self.backend.is_stirring() {
            self.backend.stir();
            self.emit(Event::StirStarted {
                t: self.secs(now),
                reason: StirReason::AfterLaunch,
            });
        }
    }

    fn on_supervision(&mut self, now: Instant) {
        if !self.stir.on_sensor {
            return;
        }
        if self.backend.read_sensor() {
            self.empty_ticks = 0;
            return;
        }
        self.empty_ticks += 1;
        if self.empty_ticks >= EMPTY_TICKS_BEFORE_STIR && !self.backend.is_stirring() {
            self.backend.stir();
            self.emit(Event::StirStarted {
                t: self.secs(now),
                reason: StirReason::Sensor,
            });
        }
    }
}

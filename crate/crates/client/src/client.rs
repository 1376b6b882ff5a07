//! Blocking TCP client.

use std::collections::VecDeque;
use std::io::{ErrorKind, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use launcher_core::lab::{BallSample, LaunchHarness, Trajectory};
use launcher_core::sim::{FeedState, LauncherGeometry, LauncherState, RampUp};

use crate::error::{ClientError, Result};
use crate::protocol::{
    encode_line, Command, Event, Notification, Request, Response, ServerFrame, DEFAULT_PORT,
    ENDPOINT_ENV,
};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_millis(500);
/// Extra wait past the announced release time before a launch counts as
/// lost.
pub const LAUNCH_MARGIN: Duration = Duration::from_millis(1500);
/// Server frames carry trajectories and may exceed the request limit.
const MAX_SERVER_FRAME_BYTES: usize = 1 << 20;

/// Result of a launch that completed.
#[derive(Debug, Clone, PartialEq)]
pub struct LaunchReport {
    pub request_id: u64,
    /// Release time on the server clock (s).
    pub t: f64,
    pub best_effort: bool,
    pub landing: Option<[f64; 2]>,
    pub trajectory: Vec<BallSample>,
    pub state: LauncherState,
}

/// Connection to a control server. Requests are answered in order; events
/// that arrive while waiting for a response are kept for
/// [`Client::next_notification`].
#[derive(Debug)]
pub struct Client {
    stream: TcpStream,
    buf: Vec<u8>,
    next_id: u64,
    timeout: Duration,
    notifications: VecDeque<Notification>,
    distance_to_table: f64,
}

impl Client {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self {
            stream,
            buf: Vec::new(),
            next_id: 1,
            timeout: DEFAULT_TIMEOUT,
            notifications: VecDeque::new(),
            distance_to_table: LauncherGeometry::default().distance_to_table,
        })
    }

    /// Connects to the endpoint in `LAUNCHER_ENDPOINT`, or the local default
    /// port.
    pub fn connect_default() -> Result<Self> {
        let endpoint = std::env::var(ENDPOINT_ENV)
            .unwrap_or_else(|_| format!("127.0.0.1:{DEFAULT_PORT}"));
        let addrs: Vec<_> = endpoint
            .to_socket_addrs()
            .map_err(|_| ClientError::Endpoint(endpoint.clone()))?
            .collect();
        if addrs.is_empty() {
            return Err(ClientError::Endpoint(endpoint));
        }
        Self::connect(&addrs[..])
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }

    /// Launcher-to-table distance recorded with trajectories.
    pub fn set_distance_to_table(&mut self, d: f64) {
        self.distance_to_table = d;
    }

    /// Sends one command and waits for its response. Rejections become
    /// [`ClientError::Rejected`].
    pub fn request(&mut self, command: Command) -> Result<Response> {
        let cmd = command.name();
        let id = self.send(command)?;
        let resp = self.wait_response(id)?;
        if resp.ok {
            Ok(resp)
        } else {
            Err(ClientError::Rejected {
                cmd,
                message: resp.error.unwrap_or_default(),
            })
        }
    }

    /// Writes a request without waiting and returns its id.
    pub fn send(&mut self, command: Command) -> Result<u64> {
        let id = self.next_id;
        self.next_id += 1;
        let line = encode_line(&Request { id, command });
        self.stream.write_all(line.as_bytes())?;
        Ok(id)
    }

    /// Waits for the response to `id`, skipping responses to older requests.
    pub fn wait_response(&mut self, id: u64) -> Result<Response> {
        let deadline = Instant::now() + self.timeout;
        loop {
            match self.read_frame(deadline)? {
                Some(ServerFrame::Response(r)) => match r.id {
                    Some(rid) if rid == id => return Ok(r),
                    Some(rid) if rid < id => continue,
                    None => {
                        return Err(ClientError::Rejected {
                            cmd: "request",
                            message: r.error.unwrap_or_default(),
                        })
                    }
                    Some(_) => continue,
                },
                Some(ServerFrame::Notification(n)) => self.notifications.push_back(n),
                Some(ServerFrame::Snapshot(_)) => {}
                None => {
                    return Err(ClientError::Timeout {
                        id,
                        timeout_ms: self.timeout.as_millis() as u64,
                    })
                }
            }
        }
    }

    /// Next queued or incoming notification, waiting at most `timeout`.
    pub fn next_notification(&mut self, timeout: Duration) -> Result<Option<Notification>> {
        if let Some(n) = self.notifications.pop_front() {
            return Ok(Some(n));
        }
        let deadline = Instant::now() + timeout;
        loop {
            match self.read_frame(deadline)? {
                Some(ServerFrame::Notification(n)) => return Ok(Some(n)),
                Some(_) => {}
                None => return Ok(None),
            }
        }
    }

    /// Reads one frame, or `None` at the deadline. Partial input stays
    /// buffered for the next call.
    fn read_frame(&mut self, deadline: Instant) -> Result<Option<ServerFrame>> {
        loop {
            if let Some(pos) = self.buf.iter().position(|&b| b == b'\n') {
                let line: Vec<u8> = self.buf.drain(..=pos).collect();
                let text = &line[..line.len() - 1];
                if text.iter().all(u8::is_ascii_whitespace) {
                    continue;
                }
                return Ok(Some(serde_json::from_slice(text)?));
            }
            if self.buf.len() > MAX_SERVER_FRAME_BYTES {
                return Err(ClientError::FrameTooLong(self.buf.len()));
            }
            let now = Instant::now();
            if now >= deadline {
                return Ok(None);
            }
            self.stream.set_read_timeout(Some(deadline - now))?;
            let mut chunk = [0u8; 8192];
            match self.stream.read(&mut chunk) {
                Ok(0) => return Err(ClientError::Closed),
                Ok(n) => self.buf.extend_from_slice(&chunk[..n]),
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                    return Ok(None)
                }
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
    }

    pub fn ping(&mut self) -> Result<Response> {
        self.request(Command::Ping)
    }

    pub fn get_state(&mut self) -> Result<(LauncherState, FeedState)> {
        let r = self.request(Command::GetState)?;
        Ok((r.state, r.feed))
    }

    pub fn set_wheels(&mut self, bottom: f64, top_left: f64, top_right: f64) -> Result<LauncherState> {
        Ok(self
            .request(Command::SetWheels {
                bottom,
                top_left,
                top_right,
            })?
            .state)
    }

    pub fn set_orientation(&mut self, azimuth_deg: f64, altitude_deg: f64) -> Result<LauncherState> {
        Ok(self
            .request(Command::SetOrientation {
                azimuth_deg,
                altitude_deg,
            })?
            .state)
    }

    pub fn configure(
        &mut self,
        stroke_gain: Option<f64>,
        ramp_up_time: Option<RampUp>,
        pinch_diameter_mm: Option<f64>,
    ) -> Result<LauncherState> {
        Ok(self
            .request(Command::Configure {
                stroke_gain,
                ramp_up_time,
                pinch_diameter_mm,
            })?
            .state)
    }

    /// Sends every field of `state`.
    pub fn set_state(&mut self, state: &LauncherState) -> Result<LauncherState> {
        let w = state.wheels();
        self.set_wheels(w.bottom, w.top_left, w.top_right)?;
        self.set_orientation(state.azimuth_deg(), state.altitude_deg())?;
        self.configure(
            Some(state.stroke_gain()),
            Some(state.ramp_up_time()),
            Some(state.pinch_diameter_mm()),
        )
    }

    /// Starts a launch now; the response carries the `scheduled` event.
    pub fn launch(&mut self) -> Result<Response> {
        self.request(Command::Launch)
    }

    /// Schedules a release at a time on the server's monotonic clock.
    pub fn launch_at(&mut self, t_monotonic_s: f64) -> Result<Response> {
        self.request(Command::LaunchAt {
            t_monotonic_s: Some(t_monotonic_s),
            t_unix_s: None,
        })
    }

    /// Schedules a release at a Unix time.
    pub fn launch_at_unix(&mut self, t_unix_s: f64) -> Result<Response> {
        self.request(Command::LaunchAt {
            t_monotonic_s: None,
            t_unix_s: Some(t_unix_s),
        })
    }

    pub fn stir(&mut self) -> Result<Response> {
        self.request(Command::Stir)
    }

    pub fn shutdown(&mut self) -> Result<Response> {
        self.request(Command::Shutdown)
    }

    /// Launches now and blocks until the ball is released.
    pub fn launch_and_wait(&mut self) -> Result<LaunchReport> {
        let r = self.launch()?;
        self.wait_launched(&r)
    }

    /// Waits for the launch announced by a `launch` or `launch_at` response.
    pub fn wait_launched(&mut self, scheduled: &Response) -> Result<LaunchReport> {
        let (id, t_release) = match scheduled.event {
            Some(Event::Scheduled {
                request_id,
                t_release_s,
                ..
            }) => (request_id, t_release_s),
            _ => {
                return Err(ClientError::Rejected {
                    cmd: "launch",
                    message: "response carries no scheduled event".into(),
                })
            }
        };
        let lead = (t_release - scheduled.t_monotonic_s).max(0.0);
        let deadline = Instant::now() + Duration::from_secs_f64(lead) + LAUNCH_MARGIN;
        let mut kept = VecDeque::new();
        let out = loop {
            let Some(n) = self.next_notification(deadline.saturating_duration_since(Instant::now()))?
            else {
                break Err(ClientError::Timeout {
                    id,
                    timeout_ms: (lead * 1000.0) as u64 + LAUNCH_MARGIN.as_millis() as u64,
                });
            };
            match n.event {
                Event::Launched {
                    request_id,
                    t,
                    best_effort,
                    landing,
                    trajectory,
                } if request_id == id => {
                    break Ok(LaunchReport {
                        request_id,
                        t,
                        best_effort,
                        landing,
                        trajectory,
                        state: n.state,
                    })
                }
                Event::FeedStarved { request_id, .. } if request_id == id => {
                    break Err(ClientError::FeedStarved { request_id })
                }
                _ => kept.push_back(n),
            }
        };
        kept.append(&mut self.notifications);
        self.notifications = kept;
        out
    }
}

fn harness_error(e: ClientError) -> launcher_core::Error {
    match e {
        ClientError::Io(e) => launcher_core::Error::Io(e),
        other => launcher_core::Error::Io(std::io::Error::other(other)),
    }
}

impl LaunchHarness for Client {
    fn apply_state(&mut self, state: &LauncherState) -> launcher_core::Result<()> {
        self.set_state(state).map(drop).map_err(harness_error)
    }

    fn set_orientation(&mut self, azimuth_deg: f64, altitude_deg: f64) -> launcher_core::Result<()> {
        Client::set_orientation(self, azimuth_deg, altitude_deg)
            .map(drop)
            .map_err(harness_error)
    }

    fn launch(&mut self) -> launcher_core::Result<Trajectory> {
        let report = self.launch_and_wait().map_err(harness_error)?;
        Trajectory::new(
            format!("remote-{}", report.request_id),
            report.trajectory,
            Some(report.state),
            self.distance_to_table,
        )
    }
}

//! Newline-delimited JSON protocol shared by the TCP server, the WebSocket
//! gateway and the client.
//!
//! Every request is one JSON object on one line carrying an `id` and a
//! `cmd`. The server answers each request with exactly one [`Response`]
//! carrying the same `id`, in request order per connection. Unsolicited
//! [`Notification`]s (launch and feed events) may arrive between responses;
//! the gateway additionally pushes [`Snapshot`]s.

use launcher_core::lab::BallSample;
use launcher_core::sim::{FeedState, LauncherState, RampUp};
use serde::{Deserialize, Serialize};

pub const DEFAULT_PORT: u16 = 5555;
pub const DEFAULT_GATEWAY_PORT: u16 = 8080;
/// Longest accepted frame including the newline (bytes).
pub const MAX_FRAME_BYTES: usize = 64 * 1024;
/// Environment variable holding the default `host:port` endpoint.
pub const ENDPOINT_ENV: &str = "LAUNCHER_ENDPOINT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum Command {
    Ping,
    GetState,
    /// Wheel actuations in percent.
    SetWheels {
        bottom: f64,
        top_left: f64,
        top_right: f64,
    },
    SetOrientation {
        azimuth_deg: f64,
        altitude_deg: f64,
    },
    /// Absent fields keep their value.
    Configure {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stroke_gain: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ramp_up_time: Option<RampUp>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pinch_diameter_mm: Option<f64>,
    },
    Launch,
    /// Release time on the server's monotonic clock or as Unix time; exactly
    /// one must be given.
    LaunchAt {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_monotonic_s: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_unix_s: Option<f64>,
    },
    Stir,
    Shutdown,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ping => "ping",
            Command::GetState => "get_state",
            Command::SetWheels { .. } => "set_wheels",
            Command::SetOrientation { .. } => "set_orientation",
            Command::Configure { .. } => "configure",
            Command::Launch => "launch",
            Command::LaunchAt { .. } => "launch_at",
            Command::Stir => "stir",
            Command::Shutdown => "shutdown",
        }
    }
}

/// Reply to one request. `id` is null only when the request could not be
/// parsed far enough to read it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: Option<u64>,
    pub ok: bool,
    pub state: LauncherState,
    pub feed: FeedState,
    /// Server monotonic clock when the response was built (s).
    pub t_monotonic_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<Event>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StirReason {
    /// The fill sensor stayed empty.
    Sensor,
    AfterLaunch,
    Request,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    /// A launch was accepted; `t_release_s` is the expected release time.
    Scheduled {
        request_id: u64,
        t_release_s: f64,
        /// The requested time could not be met and the launch starts as
        /// early as possible instead.
        best_effort: bool,
    },
    Launched {
        request_id: u64,
        /// Release time on the server clock (s).
        t: f64,
        best_effort: bool,
        /// Estimated landing on the table plane (m), when one was found.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        landing: Option<[f64; 2]>,
        /// Tracked ball positions of the flight.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        trajectory: Vec<BallSample>,
    },
    FeedStarved {
        request_id: u64,
        t: f64,
    },
    ClogResolved {
        t: f64,
    },
    StirStarted {
        t: f64,
        reason: StirReason,
    },
}

/// Event pushed without a request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Notification {
    pub event: Event,
    pub state: LauncherState,
    pub t_monotonic_s: f64,
}

/// Full observable server state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub state: LauncherState,
    pub feed: FeedState,
    pub t_monotonic_s: f64,
    /// A launch is ramping up or feeding.
    pub launch_active: bool,
    pub launches_scheduled: usize,
    pub stirring: bool,
    pub launches: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotFrame {
    pub snapshot: Snapshot,
}

/// Anything the server sends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ServerFrame {
    Response(Response),
    Notification(Notification),
    Snapshot(SnapshotFrame),
}

/// One frame as a line terminated by `\n`.
pub fn encode_line<T: Serialize>(frame: &T) -> String {
    let mut s = serde_json::to_string(frame).expect("protocol types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    fn parse(v: serde_json::Value) -> Request {
        serde_json::from_value(v).unwrap()
    }

    #[test]
    fn field_names_match_the_protocol_table() {
        let cases = [
            (json!({"id": 1, "cmd": "ping"}), Command::Ping),
            (json!({"id": 1, "cmd": "get_state"}), Command::GetState),
            (
                json!({"id": 1, "cmd": "set_wheels", "bottom": 40.0, "top_left": 41.0, "top_right": 42.0}),
                Command::SetWheels {
                    bottom: 40.0,
                    top_left: 41.0,
                    top_right: 42.0,
                },
            ),
            (
                json!({"id": 1, "cmd": "set_orientation", "azimuth_deg": -3.0, "altitude_deg": 19.9}),
                Command::SetOrientation {
                    azimuth_deg: -3.0,
                    altitude_deg: 19.9,
                },
            ),
            (
                json!({"id": 1, "cmd": "configure", "ramp_up_time": "continuous"}),
                Command::Configure {
                    stroke_gain: None,
                    ramp_up_time: Some(RampUp::Continuous),
                    pinch_diameter_mm: None,
                },
            ),
            (
                json!({"id": 1, "cmd": "configure", "stroke_gain": 1.0, "ramp_up_time": 2.5, "pinch_diameter_mm": 37.0}),
                Command::Configure {
                    stroke_gain: Some(1.0),
                    ramp_up_time: Some(RampUp::Seconds(2.5)),
                    pinch_diameter_mm: Some(37.0),
                },
            ),
            (json!({"id": 1, "cmd": "launch"}), Command::Launch),
            (
                json!({"id": 1, "cmd": "launch_at", "t_monotonic_s": 12.5}),
                Command::LaunchAt {
                    t_monotonic_s: Some(12.5),
                    t_unix_s: None,
                },
            ),
            (
                json!({"id": 1, "cmd": "launch_at", "t_unix_s": 1.7e9}),
                Command::LaunchAt {
                    t_monotonic_s: None,
                    t_unix_s: Some(1.7e9),
                },
            ),
            (json!({"id": 1, "cmd": "stir"}), Command::Stir),
            (json!({"id": 1, "cmd": "shutdown"}), Command::Shutdown),
        ];
        for (v, cmd) in cases {
            let r = parse(v.clone());
            assert_eq!(r.command, cmd);
            assert_eq!(serde_json::to_value(&r).unwrap(), v, "{}", cmd.name());
        }
    }

    #[test]
    fn unknown_commands_are_rejected() {
        assert!(serde_json::from_value::<Request>(json!({"id": 1, "cmd": "explode"})).is_err());
        assert!(serde_json::from_value::<Request>(json!({"id": 1})).is_err());
        assert!(serde_json::from_value::<Request>(json!({"cmd": "ping"})).is_err());
    }

    #[test]
    fn frames_are_told_apart() {
        let state = LauncherState::default();
        let feed = FeedState {
            queue_length: 4,
            clogged: false,
            stroke_angle: 0.0,
            sensor_filled: true,
        };
        let frames = [
            ServerFrame::Response(Response {
                id: Some(3),
                ok: true,
                state,
                feed,
                t_monotonic_s: 1.0,
                event: Some(Event::ClogResolved { t: 1.0 }),
                error: None,
            }),
            ServerFrame::Notification(Notification {
                event: Event::StirStarted {
                    t: 2.0,
                    reason: StirReason::Sensor,
                },
                state,
                t_monotonic_s: 2.0,
            }),
            ServerFrame::Snapshot(SnapshotFrame {
                snapshot: Snapshot {
                    state,
                    feed,
                    t_monotonic_s: 3.0,
                    launch_active: false,
                    launches_scheduled: 0,
                    stirring: false,
                    launches: 0,
                },
            }),
        ];
        for f in frames {
            let line = encode_line(&f);
            assert!(line.ends_with('\n') && !line[..line.len() - 1].contains('\n'));
            assert_eq!(serde_json::from_str::<ServerFrame>(&line).unwrap(), f);
        }
    }

    proptest! {
        #[test]
        fn requests_round_trip(id in any::<u64>(), a in -200.0f64..200.0, b in -200.0f64..200.0, c in -200.0f64..200.0) {
            for command in [
                Command::SetWheels { bottom: a, top_left: b, top_right: c },
                Command::SetOrientation { azimuth_deg: a, altitude_deg: b },
                Command::LaunchAt { t_monotonic_s: Some(c), t_unix_s: None },
                Command::Configure { stroke_gain: Some(a.abs()), ramp_up_time: Some(RampUp::Seconds(b.abs())), pinch_diameter_mm: None },
            ] {
                let r = Request { id, command };
                let back: Request = serde_json::from_str(encode_line(&r).trim_end()).unwrap();
                prop_assert_eq!(back, r);
            }
        }
    }
}

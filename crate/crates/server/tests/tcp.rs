//! The TCP protocol against a live server on loopback.

mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::time::{Duration, Instant};

use common::{fast_config, Running};
use launcher_client::{Client, ClientError, Command, Event, Request, Response, ServerFrame};
use launcher_core::sim::{FeedConfig, LauncherState, RampUp, WheelActuation};
use launcher_server::{serve, BackendKind, ServerConfig, ServerError, StirPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn raw(addr: std::net::SocketAddr) -> (BufReader<TcpStream>, TcpStream) {
    let s = TcpStream::connect(addr).unwrap();
    s.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
    (BufReader::new(s.try_clone().unwrap()), s)
}

/// Next response line, skipping notifications.
fn read_response(r: &mut BufReader<TcpStream>) -> Option<Response> {
    loop {
        let mut line = String::new();
        if r.read_line(&mut line).ok()? == 0 {
            return None;
        }
        match serde_json::from_str::<ServerFrame>(&line).expect("server frames parse") {
            ServerFrame::Response(resp) => return Some(resp),
            _ => continue,
        }
    }
}

#[test]
fn ping_round_trip_p99_under_budget() {
    let server = Running::start(ServerConfig::ephemeral());
    let mut c = Client::connect(server.tcp).unwrap();
    let mut rtts: Vec<f64> = (0..1000)
        .map(|_| {
            let t = Instant::now();
            let r = c.ping().unwrap();
            assert!(r.ok);
            t.elapsed().as_secs_f64()
        })
        .collect();
    rtts.sort_by(f64::total_cmp);
    let p99 = rtts[989];
    println!("ping p50 {:.3} ms, p99 {:.3} ms", rtts[500] * 1e3, p99 * 1e3);
    assert!(p99 < 0.5);
}

#[test]
fn wire_example_from_the_protocol() {
    let server = Running::start(ServerConfig::ephemeral());
    let (mut r, mut w) = raw(server.tcp);
    w.write_all(b"{\"id\":1,\"cmd\":\"set_wheels\",\"bottom\":40.0,\"top_left\":40.0,\"top_right\":40.0}\n")
        .unwrap();
    let mut line = String::new();
    r.read_line(&mut line).unwrap();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["id"], 1);
    assert_eq!(v["ok"], true);
    assert_eq!(v["state"]["bottom"], 40.0);
    assert_eq!(v["state"]["top_left"], 40.0);
    assert_eq!(v["state"]["top_right"], 40.0);
    assert!(v["state"]["ramp_up_time"].is_string() || v["state"]["ramp_up_time"].is_number());
}

#[test]
fn pipelined_requests_are_answered_in_order() {
    let server = Running::start(ServerConfig::ephemeral());
    let (mut r, mut w) = raw(server.tcp);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ids = Vec::new();
    let mut batch = String::new();
    let mut id = 0u64;
    for _ in 0..500 {
        id += rng.gen_range(1..5);
        let command = match rng.gen_range(0..5) {
            0 => Command::Ping,
            1 => Command::GetState,
            2 => Command::SetWheels {
                bottom: rng.gen_range(-10.0..110.0),
                top_left: rng.gen_range(-10.0..110.0),
                top_right: rng.gen_range(-10.0..110.0),
            },
            3 => Command::SetOrientation {
                azimuth_deg: rng.gen_range(-20.0..20.0),
                altitude_deg: rng.gen_range(0.0..45.0),
            },
            _ => Command::Configure {
                stroke_gain: Some(rng.gen_range(-1.0..5.0)),
                ramp_up_time: None,
                pinch_diameter_mm: Some(rng.gen_range(34.0..41.0)),
            },
        };
        ids.push(id);
        batch.push_str(&serde_json::to_string(&Request { id, command }).unwrap());
        batch.push('\n');
    }
    w.write_all(batch.as_bytes()).unwrap();
    for want in ids {
        let resp = read_response(&mut r).expect("response");
        assert_eq!(resp.id, Some(want));
        assert!(resp.state.validate().is_ok());
    }
}

#[test]
fn malformed_frames_never_take_the_server_down() {
    let server = Running::start(ServerConfig::ephemeral());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let samples: Vec<Vec<u8>> = vec![
        b"not json\n".to_vec(),
        b"{}\n".to_vec(),
        b"{\"id\":-1,\"cmd\":\"ping\"}\n".to_vec(),
        b"{\"id\":7,\"cmd\":\"fly\"}\n".to_vec(),
        b"{\"id\":8,\"cmd\":\"set_wheels\",\"bottom\":\"x\"}\n".to_vec(),
        b"{\"id\":9,\"cmd\":\"set_wheels\",\"bottom\":1e999,\"top_left\":1,\"top_right\":1}\n".to_vec(),
        b"[1,2,3]\n".to_vec(),
        vec![0xff, 0xfe, 0x00, b'\n'],
        b"{\"id\":10,\"cmd\":\"configure\",\"ramp_up_time\":\"soon\"}\n".to_vec(),
    ];
    for s in &samples {
        let (mut r, mut w) = raw(server.tcp);
        w.write_all(s).unwrap();
        let resp = read_response(&mut r).expect("error response");
        assert!(!resp.ok);
        assert!(resp.error.is_some());
    }
    // the id survives when the rest of the frame is bad
    let (mut r, mut w) = raw(server.tcp);
    w.write_all(b"{\"id\":7,\"cmd\":\"fly\"}\n").unwrap();
    assert_eq!(read_response(&mut r).unwrap().id, Some(7));

    for _ in 0..200 {
        let (mut r, mut w) = raw(server.tcp);
        let n = rng.gen_range(1..400);
        let mut junk: Vec<u8> = (0..n).map(|_| rng.gen()).collect();
        junk.push(b'\n');
        w.write_all(&junk).unwrap();
        w.write_all(b"{\"id\":1,\"cmd\":\"ping\"}\n").unwrap();
        let mut got_ping = false;
        while let Some(resp) = read_response(&mut r) {
            if resp.ok && resp.id == Some(1) {
                got_ping = true;
                break;
            }
        }
        assert!(got_ping);
    }

    // an endless line is cut off with an error and a close
    let (mut r, mut w) = raw(server.tcp);
    let big = vec![b'a'; launcher_client::MAX_FRAME_BYTES];
    let _ = w.write_all(&big);
    let resp = read_response(&mut r).expect("oversize error");
    assert_eq!(resp.id, None);
    assert!(!resp.ok);
    assert!(read_response(&mut r).is_none());

    // abrupt disconnects mid-frame
    for _ in 0..20 {
        let mut s = TcpStream::connect(server.tcp).unwrap();
        s.write_all(b"{\"id\":1,\"cmd\":\"pi").unwrap();
    }

    let mut c = Client::connect(server.tcp).unwrap();
    assert!(c.ping().unwrap().ok);
}

#[test]
fn interleaved_clients_last_writer_wins() {
    let server = Running::start(ServerConfig::ephemeral());
    let mut a = Client::connect(server.tcp).unwrap();
    let mut b = Client::connect(server.tcp).unwrap();
    for i in 0..20 {
        let x = 30.0 + i as f64;
        assert_eq!(a.set_wheels(x, x, x).unwrap().wheels(), WheelActuation::equal(x));
        assert_eq!(
            b.set_wheels(x + 0.5, x + 0.5, x + 0.5).unwrap().wheels(),
            WheelActuation::equal(x + 0.5)
        );
        assert_eq!(a.get_state().unwrap().0.wheels(), WheelActuation::equal(x + 0.5));
    }
}

#[test]
fn set_state_examples() {
    let server = Running::start(ServerConfig::ephemeral());
    let mut c = Client::connect(server.tcp).unwrap();
    let target = LauncherState::new(WheelActuation::equal(40.0), 0.0, 19.9).unwrap();
    let s = c.set_state(&target).unwrap();
    assert_eq!(s, target);
    assert_eq!(c.set_state(&target).unwrap(), s);

    match c.set_orientation(0.0, 50.0) {
        Err(ClientError::Rejected { cmd, message }) => {
            assert_eq!(cmd, "set_orientation");
            assert!(message.contains("altitude"));
        }
        other => panic!("expected a rejection, got {other:?}"),
    }
    assert_eq!(c.get_state().unwrap().0, target);
}

#[test]
fn ids_strictly_increase() {
    let server = Running::start(ServerConfig::ephemeral());
    let mut c = Client::connect(server.tcp).unwrap();
    let ids: Vec<u64> = (0..10).map(|_| c.ping().unwrap().id.unwrap()).collect();
    assert!(ids.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn launch_and_wait_reports_the_release() {
    let server = Running::start(fast_config());
    let mut c = Client::connect(server.tcp).unwrap();
    let state = c.get_state().unwrap().0;
    let stroke = launcher_core::sim::stroke_time(&fast_config().sim.feed, state.stroke_gain());
    let before = c.ping().unwrap().t_monotonic_s;
    let t0 = Instant::now();
    let report = c.launch_and_wait().unwrap();
    let waited = t0.elapsed().as_secs_f64();
    assert!(waited <= stroke + state.ramp_up_time().delay() + 0.5, "{waited}");
    assert!(report.t > before);
    assert!(!report.trajectory.is_empty());
    assert!(report.landing.is_some());
}

#[test]
fn fifty_sequential_launches() {
    let server = Running::start(fast_config());
    let mut c = Client::connect(server.tcp).unwrap();
    let mut last = f64::NEG_INFINITY;
    for _ in 0..50 {
        let r = c.launch_and_wait().unwrap();
        assert!(r.t > last);
        last = r.t;
    }
}

#[test]
fn starved_feed_is_a_typed_error() {
    let mut cfg = fast_config();
    cfg.sim.feed = FeedConfig {
        clog_probability: 1.0,
        initial_queue: 1,
        capacity: 1,
        sensor_threshold: 1,
        stir_success_probability: 1.0,
        ..cfg.sim.feed
    };
    cfg.stir = StirPolicy {
        on_sensor: false,
        after_launch: false,
    };
    let server = Running::start(cfg);
    let mut c = Client::connect(server.tcp).unwrap();
    c.launch_and_wait().unwrap();
    match c.launch_and_wait() {
        Err(ClientError::FeedStarved { .. }) => {}
        other => panic!("expected starvation, got {other:?}"),
    }
    // a manual stir frees the clog and the channel refills
    c.stir().unwrap();
    std::thread::sleep(Duration::from_millis(600));
    c.launch_and_wait().unwrap();
}

#[test]
fn launch_at_over_the_wire() {
    let server = Running::start(fast_config());
    let mut c = Client::connect(server.tcp).unwrap();
    c.configure(None, Some(RampUp::Seconds(0.3)), None).unwrap();
    let now = c.ping().unwrap().t_monotonic_s;
    let target = now + 1.0;
    let resp = c.launch_at(target).unwrap();
    let report = c.wait_launched(&resp).unwrap();
    assert!((report.t - target).abs() <= 0.05, "{} vs {target}", report.t);
    assert!(!report.best_effort);

    match c.launch_at(now - 1.0) {
        Err(ClientError::Rejected { cmd, .. }) => assert_eq!(cmd, "launch_at"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn events_reach_every_client() {
    let server = Running::start(fast_config());
    let mut a = Client::connect(server.tcp).unwrap();
    let mut b = Client::connect(server.tcp).unwrap();
    let id = a.launch_and_wait().unwrap().request_id;
    let seen = loop {
        let n = b
            .next_notification(Duration::from_secs(2))
            .unwrap()
            .expect("notification");
        if let Event::Launched { request_id, .. } = n.event {
            break request_id;
        }
    };
    assert_eq!(seen, id);
}

#[test]
fn shutdown_closes_every_connection_after_final_responses() {
    let server = Running::start(ServerConfig::ephemeral());
    let (mut r1, mut w1) = raw(server.tcp);
    let (mut r2, mut w2) = raw(server.tcp);
    w2.write_all(b"{\"id\":5,\"cmd\":\"ping\"}\n").unwrap();
    assert_eq!(read_response(&mut r2).unwrap().id, Some(5));
    w1.write_all(b"{\"id\":1,\"cmd\":\"get_state\"}\n{\"id\":2,\"cmd\":\"shutdown\"}\n")
        .unwrap();
    assert_eq!(read_response(&mut r1).unwrap().id, Some(1));
    let last = read_response(&mut r1).unwrap();
    assert_eq!(last.id, Some(2));
    assert!(last.ok);
    let mut rest = Vec::new();
    assert_eq!(r1.read_to_end(&mut rest).unwrap(), 0);
    assert_eq!(r2.read_to_end(&mut rest).unwrap(), 0);
    server.join();
}

#[test]
fn startup_errors() {
    let rt = tokio::runtime::Runtime::new().unwrap();
    rt.block_on(async {
        let busy = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let port = busy.local_addr().unwrap().port();
        let cfg = ServerConfig {
            tcp_port: port,
            ..ServerConfig::ephemeral()
        };
        assert!(matches!(serve(cfg).await, Err(ServerError::Bind { what: "tcp", .. })));

        let cfg = ServerConfig {
            backend: BackendKind::External,
            ..ServerConfig::ephemeral()
        };
        assert!(matches!(serve(cfg).await, Err(ServerError::UnsupportedBackend)));

        let cfg = ServerConfig {
            tcp_port: 7100,
            gateway_port: 7100,
            ..ServerConfig::ephemeral()
        };
        assert!(matches!(serve(cfg).await, Err(ServerError::Config(_))));
    });
}

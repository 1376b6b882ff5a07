use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use launcher_client::Client;
use launcher_core::lab::stats::read_stats_csv;
use launcher_server::ServerConfig;

fn launcher() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_launcher"));
    c.env_remove("LAUNCHER_ENDPOINT");
    c
}

fn run(args: &[&str]) -> Output {
    launcher().args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = run(&["sweep", "--param", "ramp_up", "--values", "1", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn empty_sweep_values_are_usage_errors() {
    assert_eq!(run(&["sweep", "--param", "pinch", "--values", ""]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--param", "pinch", "--values", "wide"]).status.code(), Some(2));
    // outside the launcher's pinch range
    assert_eq!(run(&["sweep", "--param", "pinch", "--values", "50"]).status.code(), Some(2));
}

#[test]
fn sweep_is_reproducible_and_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = run(&[
            "sweep", "--param", "ramp_up", "--values", "0.1,continuous", "--launches", "15",
            "--seed", "4", "--out", path(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let rows = read_stats_csv(bytes.as_slice()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].0, "ramp_up=0.1");
    assert_eq!(rows[1].0, "ramp_up=continuous");
    assert!(rows.iter().all(|(_, s)| s.n >= 13 && s.sigma_x > 0.0));
}

#[test]
fn dataset_of_one_writes_one_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["dataset", "--n", "1", "--out", path(dir.path())]);
    assert!(o.status.success());
    let files = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "jsonl"))
        .count();
    assert_eq!(files, 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("total 1 trajectories"));
    assert_eq!(run(&["dataset", "--n", "0", "--out", path(dir.path())]).status.code(), Some(2));
}

#[test]
fn eval_without_model_fails() {
    let o = run(&["eval", "--model", "/nonexistent/model.json"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

#[test]
fn train_then_eval_single_target() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let model = dir.path().join("model.json");
    let report = dir.path().join("loss.csv");
    assert!(run(&["dataset", "--n", "60", "--seed", "2", "--out", path(&data)]).status.success());
    let o = run(&[
        "train", "--data", path(&data), "--out", path(&model), "--report", path(&report),
        "--epochs", "3", "--seed", "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let loss = std::fs::read_to_string(&report).unwrap();
    assert_eq!(launcher_shoot::train::read_report(loss.as_bytes()).unwrap().len(), 3);

    let o = run(&["eval", "--model", path(&model), "--grid", "1", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "{csv}");
    assert!(lines[0].starts_with("target_x,target_y"));
    // the single target is the grid center
    assert!(lines[1].starts_with("2.085,0"), "{}", lines[1]);
    assert_eq!(run(&["eval", "--model", path(&model), "--grid", "0"]).status.code(), Some(2));
}

#[test]
fn config_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ServerConfig {
        tcp_port: 6000,
        ..ServerConfig::default()
    };
    cfg.sim.rng_seed = 99;
    cfg.sim.drag_coefficient = 0.45;
    cfg.sim.camera.jitter_sd *= 2.0;
    cfg.sim.feed.clog_probability = 0.2;
    cfg.sim.geometry.distance_to_table = 0.4;
    cfg.sim.table.height = 0.8;
    cfg.stir.after_launch = false;
    let file = dir.path().join("cfg.toml");
    std::fs::write(&file, toml::to_string(&cfg).unwrap()).unwrap();

    let o = run(&["--config", path(&file), "config", "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let back: ServerConfig = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(back, cfg);

    let o = run(&["--config", path(&file), "config"]);
    let back: ServerConfig = toml::from_str(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(back, cfg);

    std::fs::write(&file, "[sim]\nno_such_field = 1\n").unwrap();
    assert_eq!(run(&["--config", path(&file), "config"]).status.code(), Some(3));
}

#[test]
fn serve_occupied_port_exits_nonzero() {
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let o = run(&["serve", "--port", &port, "--gateway-port", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains(&port));
}

#[test]
fn serve_banner_then_remote_eval_and_shutdown() {
    let mut child = launcher()
        .args(["serve", "--port", "0", "--gateway-port", "0", "--sim-seed", "5"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    let banner = lines.next().unwrap().unwrap();
    assert!(banner.starts_with("launcher listening"), "{banner}");
    let tcp = banner.split_whitespace().nth(3).unwrap().to_string();

    // a model trained in-process drives launches through the server
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let model = dir.path().join("m.json");
    assert!(run(&["dataset", "--n", "40", "--out", path(&data)]).status.success());
    assert!(run(&["train", "--data", path(&data), "--out", path(&model), "--epochs", "2"])
        .status
        .success());
    let o = launcher()
        .args(["eval", "--model", path(&model), "--grid", "1"])
        .env("LAUNCHER_ENDPOINT", &tcp)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);

    let mut c = Client::connect(tcp.as_str()).unwrap();
    c.shutdown().unwrap();
    let t0 = Instant::now();
    loop {
        if let Some(status) = child.try_wait().unwrap() {
            assert!(status.success());
            break;
        }
        assert!(t0.elapsed() < Duration::from_secs(10), "server did not stop");
        std::thread::sleep(Duration::from_millis(20));
    }
    assert_eq!(lines.next().unwrap().unwrap(), "launcher stopped");
}

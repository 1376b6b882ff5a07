use std::sync::OnceLock;

use launcher_core::dataset::{generate, DatasetConfig};
use launcher_core::lab::{process_trajectory, PipelineConfig, Trajectory};
use launcher_core::sim::{SimConfig, SimLauncher};
use launcher_shoot::grid::{evaluate_grid, target_grid, Aim, NearestNeighbor};
use launcher_shoot::mlp::Mlp;
use launcher_shoot::{build_training_set, train, MlpModel, TrainConfig, TrainOutcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Fixture {
    trajectories: Vec<Trajectory>,
    outcome: TrainOutcome,
}

/// 415 equal-wheel trajectories and a desk-scale network trained on them.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let defaults = DatasetConfig::default();
        let cfg = DatasetConfig {
            n: 415,
            groups: vec![defaults.groups[0].clone()],
            seed: 11,
        };
        let mut trajectories = Vec::new();
        generate(&cfg, &SimConfig::default(), |g| {
            trajectories.push(g.trajectory);
            Ok(())
        })
        .unwrap();
        let rows = build_training_set(&trajectories, true).unwrap();
        let outcome = train(&rows, &TrainConfig::default()).unwrap();
        Fixture {
            trajectories,
            outcome,
        }
    })
}

fn harness(seed: u64) -> SimLauncher {
    SimLauncher::with_seed(SimConfig::default(), seed).unwrap()
}

fn base() -> launcher_core::sim::LauncherState {
    fixture().trajectories[0].control.unwrap()
}

#[test]
fn training_set_size_matches_reference_order() {
    let rows = build_training_set(&fixture().trajectories, true).unwrap();
    assert!((66_581 / 3..=66_581 * 3).contains(&rows.len()), "{} rows", rows.len());
}

#[test]
fn trained_network_hits_the_grid() {
    let f = fixture();
    let targets = target_grid(20).unwrap();
    let r = evaluate_grid(&f.outcome.model, &mut harness(7), &targets, &base(), &PipelineConfig::default()).unwrap();
    assert_eq!(r.targets.len(), 20);
    assert_eq!(r.missed, 0, "{r:?}");
    assert!(r.mean_error <= 0.15, "mean grid error {}", r.mean_error);
}

#[test]
fn untrained_network_is_far_worse() {
    let f = fixture();
    let trained = &f.outcome.model;
    let untrained = MlpModel::new(
        Mlp::new(trained.mlp.sizes(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap(),
        trained.input_norm.clone(),
        trained.output_norm.clone(),
    )
    .unwrap();
    let targets = target_grid(20).unwrap();
    let p = PipelineConfig::default();
    let good = evaluate_grid(trained, &mut harness(8), &targets, &base(), &p).unwrap();
    let bad = evaluate_grid(&untrained, &mut harness(8), &targets, &base(), &p).unwrap();
    assert!(bad.mean_error > 3.0 * good.mean_error, "untrained {bad:?} trained {good:?}");
}

#[test]
fn recorded_landings_beat_interpolated_targets() {
    let f = fixture();
    let p = PipelineConfig::default();
    let nn = NearestNeighbor::from_trajectories(&f.trajectories, &p).unwrap();
    let landings: Vec<[f64; 2]> = f
        .trajectories
        .iter()
        .filter_map(|t| process_trajectory(t, &p).0.map(|l| [l.x, l.y]))
        .filter(|l| (1.0..2.5).contains(&l[0]))
        .take(20)
        .collect();
    // midpoint between each landing and its nearest other recorded landing
    let mids: Vec<[f64; 2]> = landings
        .iter()
        .map(|a| {
            let b = nn
                .entries
                .iter()
                .map(|e| e.0)
                .filter(|b| b != a)
                .min_by(|b, c| {
                    let d = |q: &[f64; 2]| (q[0] - a[0]).hypot(q[1] - a[1]);
                    d(b).total_cmp(&d(c))
                })
                .unwrap();
            [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
        })
        .collect();
    let own = evaluate_grid(&nn, &mut harness(9), &landings, &base(), &p).unwrap();
    let interp = evaluate_grid(&nn, &mut harness(9), &mids, &base(), &p).unwrap();
    assert_eq!(own.missed, 0);
    assert!(own.mean_error <= interp.mean_error, "{} vs {}", own.mean_error, interp.mean_error);
    // the network aims at recorded landings about as well as the lookup does
    let mlp = evaluate_grid(&f.outcome.model, &mut harness(9), &landings, &base(), &p).unwrap();
    assert!(mlp.mean_error <= 0.15, "{}", mlp.mean_error);
}

#[test]
fn aim_is_clamped_for_far_targets() {
    let m = &fixture().outcome.model;
    for t in [[-5.0, 0.0], [10.0, 3.0], [1.0, -8.0]] {
        assert!(m.aim(t).apply_to(&base()).validate().is_ok());
    }
}

#[test]
fn training_history_is_recorded() {
    let h = &fixture().outcome.history;
    assert_eq!(h.len(), TrainConfig::default().epochs);
    assert!(h.last().unwrap().loss < h[0].loss);
}

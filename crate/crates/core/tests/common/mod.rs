#![allow(dead_code)]

use launcher_core::dataset::{DatasetConfig, GroupSpec};
use launcher_core::sim::{LauncherState, SimConfig, SimLauncher};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Equal-wheel states aimed across the table over the full altitude range.
pub fn on_table_states(n: usize, seed: u64) -> Vec<LauncherState> {
    let sim = SimLauncher::new(SimConfig::noiseless()).unwrap();
    let spec = GroupSpec {
        reach_x: (0.6, 2.5),
        altitude_deg: (6.4, 37.1),
        azimuth_deg: (-8.0, 8.0),
        ..DatasetConfig::default().groups[0].clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| spec.sample(&sim, &mut rng).unwrap()).collect()
}

/// Mixed-regime states as in the medium-altitude group of the data set.
pub fn mixed_states(n: usize, seed: u64) -> Vec<LauncherState> {
    let sim = SimLauncher::new(SimConfig::noiseless()).unwrap();
    let spec = DatasetConfig::default().groups[4].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| spec.sample(&sim, &mut rng).unwrap()).collect()
}

//! Synthetic recording campaigns with a fixed mix of control regimes.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::{estimate_landing, run_pipeline, PipelineConfig, Trajectory};
use crate::measured::DATASET_GROUPS;
use crate::sim::state::{ACTUATION_RANGE, ALTITUDE_RANGE_DEG, AZIMUTH_RANGE_DEG};
use crate::sim::{LauncherState, SimConfig, SimLauncher};

/// Control-parameter sampler of one regime. Orientation, spin differential
/// and an intended reach are drawn at random; the common actuation level is
/// then solved so the noise-free flight descends through contact height at
/// the intended distance. Reaches beyond the table produce deliberate misses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    /// Share of the data set (trajectory count in the reference mix).
    pub weight: usize,
    /// Intended reach along x in table coordinates (m).
    pub reach_x: (f64, f64),
    /// Magnitude of the top-against-bottom wheel differential (percent).
    pub differential: (f64, f64),
    /// Probability that the differential produces backspin instead of
    /// topspin.
    pub backspin_share: f64,
    /// Largest left-against-right differential (percent).
    pub sidespin: f64,
    pub altitude_deg: (f64, f64),
    pub azimuth_deg: (f64, f64),
}

/// Bisection steps of the level solve.
const LEVEL_ITERATIONS: usize = 18;

impl GroupSpec {
    fn new(
        name: &str,
        weight: usize,
        reach_x: (f64, f64),
        differential: (f64, f64),
        sidespin: f64,
        altitude_deg: (f64, f64),
        azimuth_deg: (f64, f64),
    ) -> Self {
        Self {
            name: name.into(),
            weight,
            reach_x,
            differential,
            backspin_share: 0.0,
            sidespin,
            altitude_deg,
            azimuth_deg,
        }
    }

    /// Draws a launcher state from this regime.
    pub fn sample<R: Rng + ?Sized>(&self, sim: &SimLauncher, rng: &mut R) -> Result<LauncherState> {
        let draw = |r: &mut R, (lo, hi): (f64, f64)| if hi > lo { r.gen_range(lo..=hi) } else { lo };
        let reach = draw(rng, self.reach_x);
        let back = rng.gen_bool(self.backspin_share.clamp(0.0, 1.0));
        let top = draw(rng, self.differential) * if back { -1.0 } else { 1.0 };
        let side = draw(rng, (-self.sidespin, self.sidespin));
        let az = draw(rng, self.azimuth_deg).clamp(AZIMUTH_RANGE_DEG.0, AZIMUTH_RANGE_DEG.1);
        let alt = draw(rng, self.altitude_deg).clamp(ALTITUDE_RANGE_DEG.0, ALTITUDE_RANGE_DEG.1);
        // zero-sum directions: bottom against top (top/backspin) and left
        // against right (sidespin)
        let e1 = [-2.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt()];
        let e2 = [0.0, 1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()];
        let at = |level: f64| {
            let wheels = [0, 1, 2].map(|i| {
                (level + top * e1[i] + side * e2[i]).clamp(ACTUATION_RANGE.0, ACTUATION_RANGE.1)
            });
            LauncherState::clamped(wheels, az, alt)
        };
        let contact_height = sim.config().table.height + sim.config().ball_radius;
        let overshoots = |state: &LauncherState| -> Result<bool> {
            let flight = sim.ideal_flight(state)?;
            // a table contact stops at contact height and never passes below it
            if let Some(c) = flight.contact {
                return Ok(c.position.x > reach);
            }
            Ok(match flight.first_descent_through(contact_height) {
                Some(t) => flight.position_at(t).is_some_and(|p| p.x > reach),
                None => flight.samples.last().is_some_and(|s| s.position.x > reach),
            })
        };
        let (mut lo, mut hi) = ACTUATION_RANGE;
        for _ in 0..LEVEL_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            if overshoots(&at(mid))? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(at(0.5 * (lo + hi)))
    }
}

/// Data set composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub n: usize,
    pub groups: Vec<GroupSpec>,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        let [g1, g2, g3, g4, g5, g6] = DATASET_GROUPS;
        Self {
            n: g1 + g2 + g3 + g4 + g5 + g6,
            groups: vec![
                GroupSpec::new("equal-wheels", g1, (0.3, 3.0), (0.0, 0.0), 0.0, (15.0, 25.0), (-14.0, 14.0)),
                GroupSpec::new("high-spin", g2, (0.5, 3.1), (20.0, 35.0), 2.0, (6.4, 20.0), (-10.0, 10.0)),
                GroupSpec::new("low-speed", g3, (0.1, 1.6), (3.0, 12.0), 2.0, (15.0, 37.1), (-10.0, 10.0)),
                GroupSpec::new("high-altitude", g4, (0.3, 3.05), (2.0, 25.0), 2.0, (28.0, 37.1), (-10.0, 10.0)),
                GroupSpec::new("medium-altitude", g5, (0.3, 3.05), (2.0, 15.0), 2.0, (15.0, 28.0), (-10.0, 10.0)),
                GroupSpec::new("low-altitude", g6, (0.3, 3.05), (0.0, 6.0), 1.0, (6.4, 15.0), (-10.0, 10.0)),
            ],
            seed: 0,
        }
    }
}

/// Splits `n` proportionally to `weights` by the largest-remainder method.
pub fn allocate(n: usize, weights: &[usize]) -> Vec<usize> {
    let total: usize = weights.iter().sum();
    if total == 0 {
        return vec![0; weights.len()];
    }
    let mut counts: Vec<usize> = weights.iter().map(|w| n * w / total).collect();
    let mut rema: Vec<(usize, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| (n * w % total, i))
        .collect();
    rema.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = n - counts.iter().sum::<usize>();
    for &(_, i) in rema.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// One generated recording.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTrajectory {
    pub group: usize,
    pub trajectory: Trajectory,
    /// The filtered recording has a valid landing on the table.
    pub on_table: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub count: usize,
    pub on_table: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub total: usize,
    pub on_table: usize,
    pub groups: Vec<GroupSummary>,
}

impl DatasetSummary {
    pub fn on_table_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.on_table as f64 / self.total as f64
        }
    }
}

/// Generates the data set, handing every trajectory to `sink` in order.
pub fn generate(
    cfg: &DatasetConfig,
    sim: &SimConfig,
    mut sink: impl FnMut(GeneratedTrajectory) -> Result<()>,
) -> Result<DatasetSummary> {
    if cfg.groups.is_empty() {
        return Err(Error::InsufficientData("no dataset groups".into()));
    }
    let counts = allocate(cfg.n, &cfg.groups.iter().map(|g| g.weight).collect::<Vec<_>>());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut launcher = SimLauncher::with_seed(sim.clone(), cfg.seed.wrapping_add(1))?;
    let pipeline = PipelineConfig {
        region: sim.table.clone(),
        contact_height: sim.table.height + sim.ball_radius,
        ..PipelineConfig::default()
    };
    let mut summary = DatasetSummary {
        total: 0,
        on_table: 0,
        groups: Vec::new(),
    };
    let mut serial = 0usize;
    for (gi, (spec, &count)) in cfg.groups.iter().zip(&counts).enumerate() {
        launcher.new_camera_session();
        let mut on_table = 0;
        for _ in 0..count {
            let state = spec.sample(&launcher, &mut rng)?;
            launcher.set_state(state)?;
            let shot = launcher.fire()?;
            serial += 1;
            let trajectory = Trajectory::new(
                format!("{serial:05}"),
                shot.observed,
                Some(shot.state),
                sim.geometry.distance_to_table,
            )?;
            let (kept, _) = run_pipeline(&trajectory, &pipeline);
            let landed = kept
                .and_then(|t| estimate_landing(t.samples(), pipeline.window, &pipeline.region).ok())
                .is_some_and(|l| l.valid && pipeline.region.on_table(l.x, l.y));
            on_table += landed as usize;
            sink(GeneratedTrajectory {
                group: gi,
                trajectory,
                on_table: landed,
            })?;
        }
        summary.groups.push(GroupSummary {
            name: spec.name.clone(),
            count,
            on_table,
        });
        summary.total += count;
        summary.on_table += on_table;
    }
    Ok(summary)
}

/// Generates the data set into `dir`: one JSON-lines file per trajectory
/// and `summary.json`.
pub fn write_dataset(cfg: &DatasetConfig, sim: &SimConfig, dir: &Path) -> Result<DatasetSummary> {
    std::fs::create_dir_all(dir)?;
    let summary = generate(cfg, sim, |g| {
        g.trajectory
            .save_jsonl(&dir.join(format!("traj_{}.jsonl", g.trajectory.id)))
    })?;
    let mut f = std::fs::File::create(dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut f, &summary)?;
    f.write_all(b"\n")?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_mix_is_exact() {
        let cfg = DatasetConfig::default();
        let w: Vec<usize> = cfg.groups.iter().map(|g| g.weight).collect();
        assert_eq!(allocate(3761, &w), DATASET_GROUPS.to_vec());
        assert_eq!(allocate(1, &w).iter().sum::<usize>(), 1);
    }

    #[test]
    fn equal_wheel_group_has_equal_wheels() {
        let cfg = DatasetConfig::default();
        let sim = SimLauncher::new(SimConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            assert!(cfg.groups[0].sample(&sim, &mut rng).unwrap().wheels().is_equal());
        }
    }

    #[test]
    fn tiny_dataset() {
        let cfg = DatasetConfig {
            n: 1,
            ..DatasetConfig::default()
        };
        let mut got = Vec::new();
        let s = generate(&cfg, &SimConfig::default(), |g| {
            got.push(g);
            Ok(())
        })
        .unwrap();
        assert_eq!((s.total, got.len()), (1, 1));
    }

    proptest! {
        #[test]
        fn allocation_sums_to_n(n in 0usize..10_000, w in prop::collection::vec(0usize..2000, 1..8)) {
            let c = allocate(n, &w);
            if w.iter().sum::<usize>() > 0 {
                prop_assert_eq!(c.iter().sum::<usize>(), n);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn samples_are_valid_states(seed in 0u64..1000) {
            let sim = SimLauncher::new(SimConfig::default()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for g in &DatasetConfig::default().groups {
                prop_assert!(g.sample(&sim, &mut rng).unwrap().validate().is_ok());
            }
        }
    }
}

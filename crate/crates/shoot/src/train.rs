use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::TrainingRow;
use crate::error::{Result, ShootError};
use crate::mlp::{Adam, AdamConfig, Mlp};
use crate::model::MlpModel;
use crate::normalize::Normalizer;

/// Layer sizes of the full-scale network.
pub const FULL_LAYERS: [usize; 5] = [3, 2048, 512, 128, 3];
/// Layer sizes of the desk-scale network.
pub const DESK_LAYERS: [usize; 5] = [3, 64, 32, 16, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub layers: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    /// Learning rate of the first epoch.
    pub lr_max: f64,
    /// Learning rate of the last epoch; cosine decay in between.
    pub lr_min: f64,
    pub adam: AdamConfig,
    pub dropout: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            layers: DESK_LAYERS.to_vec(),
            epochs: 300,
            batch_size: 256,
            lr_max: 1e-3,
            lr_min: 1e-4,
            adam: AdamConfig::default(),
            dropout: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// The full-size network and schedule.
    pub fn full() -> Self {
        Self {
            layers: FULL_LAYERS.to_vec(),
            epochs: 1400,
            batch_size: 4096,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(ShootError::InvalidConfig("epochs and batch_size must be at least 1".into()));
        }
        if self.layers.first() != Some(&3) || self.layers.last() != Some(&3) {
            return Err(ShootError::InvalidConfig(format!(
                "layers {:?} must start and end with 3",
                self.layers
            )));
        }
        if !(self.lr_max > 0.0 && self.lr_min > 0.0 && self.lr_min <= self.lr_max) {
            return Err(ShootError::InvalidConfig("need 0 < lr_min <= lr_max".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ShootError::InvalidConfig("dropout must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Cosine decay from `lr_max` at epoch 0 to `lr_min` at the last epoch.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            return self.lr_max;
        }
        let u = epoch as f64 / (self.epochs - 1) as f64;
        self.lr_min + 0.5 * (self.lr_max - self.lr_min) * (1.0 + (std::f64::consts::PI * u).cos())
    }
}

/// Loss after one epoch: mean squared error of the deterministic network on
/// the normalized training set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub history: Vec<EpochRecord>,
}

fn columns(rows: &[[f64; 3]]) -> DMatrix<f64> {
    DMatrix::from_fn(3, rows.len(), |i, j| rows[j][i])
}

fn gather(all: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(all.nrows(), idx.len(), |i, j| all[(i, idx[j])])
}

/// Trains a network on standardized rows with Adam, minibatches in a seeded
/// shuffle order and dropout on the hidden layers.
pub fn train(rows: &[TrainingRow], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(ShootError::EmptyTrainingSet);
    }
    let inputs: Vec<[f64; 3]> = rows.iter().map(|r| r.input).collect();
    let targets: Vec<[f64; 3]> = rows.iter().map(|r| r.target).collect();
    let input_norm = Normalizer::fit(&inputs)?;
    let output_norm = Normalizer::fit(&targets)?;
    let x_all = columns(&inputs.iter().map(|v| input_norm.normalize(v)).collect::<Vec<_>>());
    let t_all = columns(&targets.iter().map(|v| output_norm.normalize(v)).collect::<Vec<_>>());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mlp = Mlp::new(&cfg.layers, &mut rng)?;
    let mut adam = Adam::new(&mlp, cfg.adam);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate(epoch);
        order.shuffle(&mut rng);
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let (x, t) = (gather(&x_all, idx), gather(&t_all, idx));
            let (loss, grads) = mlp.loss_and_gradients(&x, &t, Some((cfg.dropout, &mut rng)));
            if !loss.is_finite() || !grads.max_abs().is_finite() {
                return Err(ShootError::NonFiniteLoss {
                    epoch,
                    batch,
                    lr,
                    max_weight: mlp.max_abs_weight(),
                });
            }
            adam.step(&mut mlp, &grads, lr);
        }
        let loss = mlp.loss(&x_all, &t_all);
        if !loss.is_finite() {
            return Err(ShootError::NonFiniteLoss {
                epoch,
                batch: usize::MAX,
                lr,
                max_weight: mlp.max_abs_weight(),
            });
        }
        history.push(EpochRecord { epoch, loss, lr });
    }
    Ok(TrainOutcome {
        model: MlpModel::new(mlp, input_norm, output_norm)?,
        history,
    })
}

/// Writes the training report as CSV `epoch,loss,lr`.
pub fn write_report<W: Write>(out: W, history: &[EpochRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in history {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report<R: Read>(input: R) -> Result<Vec<EpochRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(ShootError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_rows(n: usize, seed: u64) -> Vec<TrainingRow> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                TrainingRow {
                    input: x,
                    target: [
                        0.5 * x[0] - 0.2 * x[1] + 0.1 * x[2],
                        -0.3 * x[0] + 0.4 * x[2],
                        0.2 * x[1] + 0.25 * x[2],
                    ],
                }
            })
            .collect()
    }

    fn small_cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            layers: vec![3, 16, 3],
            epochs,
            batch_size: 32,
            dropout: 0.0,
            seed: 7,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn cosine_schedule_endpoints() {
        let c = TrainConfig::default();
        assert_eq!(c.learning_rate(0), 1e-3);
        assert!((c.learning_rate(c.epochs - 1) - 1e-4).abs() < 1e-15);
        assert!(c.learning_rate(10) > c.learning_rate(11));
    }

    #[test]
    fn learns_linear_map() {
        let out = train(&linear_rows(512, 1), &TrainConfig { batch_size: 16, ..small_cfg(500) }).unwrap();
        let last = out.history.last().unwrap().loss;
        assert!(last < 1e-3, "final normalized loss {last}");
        for w in out.history.windows(51) {
            assert!(w[50].loss <= w[0].loss, "loss rose between epochs {} and {}", w[0].epoch, w[50].epoch);
        }
    }

    #[test]
    fn fixed_seed_is_bit_reproducible() {
        let rows = linear_rows(100, 2);
        let cfg = TrainConfig {
            dropout: 0.1,
            ..small_cfg(20)
        };
        let a = train(&rows, &cfg).unwrap();
        let b = train(&rows, &cfg).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn shifted_inputs_give_same_normalized_history() {
        let rows = linear_rows(100, 3);
        let shifted: Vec<_> = rows
            .iter()
            .map(|r| TrainingRow {
                input: [r.input[0] + 2.0, r.input[1] - 1.0, r.input[2] + 0.76],
                ..*r
            })
            .collect();
        let cfg = small_cfg(30);
        let a = train(&rows, &cfg).unwrap();
        let b = train(&shifted, &cfg).unwrap();
        for (p, q) in a.history.iter().zip(&b.history) {
            assert!((p.loss - q.loss).abs() <= 1e-9 * p.loss.max(1e-12), "{p:?} {q:?}");
        }
    }

    #[test]
    fn divergence_is_reported() {
        let cfg = TrainConfig {
            lr_max: 1e300,
            lr_min: 1e300,
            ..small_cfg(5)
        };
        let mut rows = linear_rows(64, 4);
        rows[0].target[0] = 1e200;
        assert!(matches!(train(&rows, &cfg), Err(ShootError::NonFiniteLoss { .. })));
    }

    #[test]
    fn report_round_trip() {
        let h = vec![
            EpochRecord { epoch: 0, loss: 0.5, lr: 1e-3 },
            EpochRecord { epoch: 1, loss: 0.25, lr: 1e-4 },
        ];
        let mut buf = Vec::new();
        write_report(&mut buf, &h).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("epoch,loss,lr\n"));
        assert_eq!(read_report(buf.as_slice()).unwrap(), h);
    }

    #[test]
    fn invalid_configs() {
        assert!(TrainConfig { epochs: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { layers: vec![2, 3], ..TrainConfig::default() }.validate().is_err());
        assert!(train(&[], &TrainConfig::default()).is_err());
    }
}

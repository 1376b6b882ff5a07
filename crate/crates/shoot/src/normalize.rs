use serde::{Deserialize, Serialize};

use crate::error::{Result, ShootError};

/// Smallest standard deviation treated as non-constant.
const MIN_SD: f64 = 1e-12;

/// Per-dimension z-score constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Normalizer {
    /// Population mean and standard deviation per column. A constant column
    /// gets sd 1, so it maps to 0.
    pub fn fit<const N: usize>(rows: &[[f64; N]]) -> Result<Self> {
        if rows.is_empty() {
            return Err(ShootError::EmptyTrainingSet);
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; N];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut sd = vec![0.0; N];
        for r in rows {
            for ((s, v), m) in sd.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut sd {
            *s = (*s / n).sqrt();
            if !(*s > MIN_SD) {
                *s = 1.0;
            }
        }
        Ok(Self { mean, sd })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            sd: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize<const N: usize>(&self, v: &[f64; N]) -> [f64; N] {
        std::array::from_fn(|i| (v[i] - self.mean[i]) / self.sd[i])
    }

    pub fn denormalize<const N: usize>(&self, v: &[f64; N]) -> [f64; N] {
        std::array::from_fn(|i| v[i] * self.sd[i] + self.mean[i])
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        if self.mean.len() != dim || self.sd.len() != dim {
            return Err(ShootError::InvalidModel(format!(
                "normalizer has {} means and {} sds, expected {dim}",
                self.mean.len(),
                self.sd.len()
            )));
        }
        if self.mean.iter().any(|m| !m.is_finite()) || self.sd.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(ShootError::InvalidModel("normalizer constants must be finite with sd > 0".into()));
        }
        Ok(())
    }
}

/// Fits constants on `rows` and returns the normalized rows with them.
pub fn standardize<const N: usize>(rows: &[[f64; N]]) -> Result<(Vec<[f64; N]>, Normalizer)> {
    let norm = Normalizer::fit(rows)?;
    Ok((rows.iter().map(|r| norm.normalize(r)).collect(), norm))
}

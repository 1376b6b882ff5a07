use std::path::Path;

use launcher_core::sim::state::{ACTUATION_RANGE, ALTITUDE_RANGE_DEG, AZIMUTH_RANGE_DEG};
use launcher_core::sim::LauncherState;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShootError};
use crate::mlp::Mlp;
use crate::normalize::Normalizer;

/// Network outputs: orientation and the common wheel actuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Controls {
    pub azimuth_deg: f64,
    pub altitude_deg: f64,
    /// Percent, applied to all three wheels.
    pub actuation: f64,
}

impl Controls {
    pub fn from_array(v: [f64; 3]) -> Self {
        Self {
            azimuth_deg: v[0],
            altitude_deg: v[1],
            actuation: v[2],
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.azimuth_deg, self.altitude_deg, self.actuation]
    }

    /// Clamped into the launcher's ranges.
    pub fn clamped(&self) -> Self {
        Self {
            azimuth_deg: self.azimuth_deg.clamp(AZIMUTH_RANGE_DEG.0, AZIMUTH_RANGE_DEG.1),
            altitude_deg: self.altitude_deg.clamp(ALTITUDE_RANGE_DEG.0, ALTITUDE_RANGE_DEG.1),
            actuation: self.actuation.clamp(ACTUATION_RANGE.0, ACTUATION_RANGE.1),
        }
    }

    /// `base` with these controls applied (clamped).
    pub fn apply_to(&self, base: &LauncherState) -> LauncherState {
        let c = self.clamped();
        let mut s = LauncherState::clamped([c.actuation; 3], c.azimuth_deg, c.altitude_deg);
        // the remaining settings were validated as part of `base`
        let _ = s.set_stroke_gain(base.stroke_gain());
        let _ = s.set_ramp_up_time(base.ramp_up_time());
        let _ = s.set_pinch_diameter_mm(base.pinch_diameter_mm());
        s
    }
}

/// Network plus the normalization of its inputs (positions) and outputs
/// (controls).
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub mlp: Mlp,
    pub input_norm: Normalizer,
    pub output_norm: Normalizer,
}

impl MlpModel {
    pub fn new(mlp: Mlp, input_norm: Normalizer, output_norm: Normalizer) -> Result<Self> {
        if mlp.input_dim() != 3 || mlp.output_dim() != 3 {
            return Err(ShootError::InvalidModel(format!(
                "expected 3 inputs and 3 outputs, got {:?}",
                mlp.sizes()
            )));
        }
        input_norm.validate(3)?;
        output_norm.validate(3)?;
        Ok(Self {
            mlp,
            input_norm,
            output_norm,
        })
    }

    /// Denormalized network output for a position, without clamping. With
    /// `train_mode`, hidden units are dropped at `dropout` rate.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        position: &[f64; 3],
        train_mode: Option<(f64, &mut R)>,
    ) -> [f64; 3] {
        let x = DMatrix::from_column_slice(3, 1, &self.input_norm.normalize(position));
        let y = match train_mode {
            None => self.mlp.forward(&x),
            Some(d) => self.mlp.forward_train(&x, d),
        };
        self.output_norm.denormalize(&[y[0], y[1], y[2]])
    }

    /// Clamped controls for a desired ball position.
    pub fn predict(&self, position: &[f64; 3]) -> Controls {
        Controls::from_array(self.forward::<rand_chacha::ChaCha8Rng>(position, None)).clamped()
    }

    /// Bound on the Euclidean Lipschitz constant of the unclamped output with
    /// respect to the raw input.
    pub fn lipschitz_bound(&self) -> f64 {
        let out = self.output_norm.sd.iter().fold(0.0f64, |m, s| m.max(*s));
        let inp = self.input_norm.sd.iter().fold(f64::INFINITY, |m, s| m.min(*s));
        out * self.mlp.lipschitz_bound() / inp
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            sizes: self.mlp.sizes().to_vec(),
            weights: self
                .mlp
                .weights()
                .iter()
                .map(|w| {
                    let mut row_major = Vec::with_capacity(w.len());
                    for r in w.row_iter() {
                        row_major.extend(r.iter());
                    }
                    row_major
                })
                .collect(),
            biases: self.mlp.biases().iter().map(|b| b.iter().copied().collect()).collect(),
            input_norm: self.input_norm.clone(),
            output_norm: self.output_norm.clone(),
        }
    }

    pub fn from_file(f: ModelFile) -> Result<Self> {
        if f.format != MODEL_FORMAT || f.version != MODEL_VERSION {
            return Err(ShootError::InvalidModel(format!(
                "unsupported model format {} v{}",
                f.format, f.version
            )));
        }
        if f.sizes.len() < 2 || f.weights.len() != f.sizes.len() - 1 || f.biases.len() != f.weights.len() {
            return Err(ShootError::InvalidModel("layer count mismatch".into()));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (l, (w, b)) in f.weights.iter().zip(&f.biases).enumerate() {
            let (rows, cols) = (f.sizes[l + 1], f.sizes[l]);
            if w.len() != rows * cols || b.len() != rows {
                return Err(ShootError::InvalidModel(format!("layer {l} has wrong parameter count")));
            }
            weights.push(DMatrix::from_row_slice(rows, cols, w));
            biases.push(DVector::from_column_slice(b));
        }
        Self::new(Mlp::from_parameters(weights, biases)?, f.input_norm, f.output_norm)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(&mut out, &self.to_file())?;
        std::io::Write::flush(&mut out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::from_file(serde_json::from_reader(f)?)
    }
}

pub const MODEL_FORMAT: &str = "launcher-mlp";
pub const MODEL_VERSION: u32 = 1;

/// Serialized model: layer sizes, row-major weight matrices, biases and
/// normalization constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub input_norm: Normalizer,
    pub output_norm: Normalizer,
}

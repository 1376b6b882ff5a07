//! Fully connected network with sigmoid hidden layers and a linear output,
//! trained by reverse-mode accumulation.
//!
//! Activations are stored column-wise: a batch of `B` inputs of width `n`
//! is an `n × B` matrix.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShootError};

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    /// `weights[l]` maps layer `l` to layer `l + 1` (`sizes[l+1] × sizes[l]`).
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
}

/// Parameter-shaped gradient (or moment) buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl Gradients {
    fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            weights: mlp.weights.iter().map(|w| DMatrix::zeros(w.nrows(), w.ncols())).collect(),
            biases: mlp.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.biases.iter().flat_map(|b| b.iter()))
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(ShootError::InvalidConfig(format!(
            "layer sizes {sizes:?} need at least two non-empty layers"
        )));
    }
    Ok(())
}

/// Forward pass intermediates of one batch.
struct Cache {
    /// Layer outputs; `a[0]` is the input.
    a: Vec<DMatrix<f64>>,
    /// Sigmoid values of hidden layers before dropout.
    s: Vec<DMatrix<f64>>,
    /// Inverted-dropout multipliers of hidden layers.
    masks: Vec<Option<DMatrix<f64>>>,
}

impl Mlp {
    /// Glorot-uniform weights and zero biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        check_sizes(sizes)?;
        let weights = sizes
            .windows(2)
            .map(|w| {
                let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
                DMatrix::from_fn(w[1], w[0], |_, _| rng.gen_range(-limit..limit))
            })
            .collect();
        let biases = sizes[1..].iter().map(|&n| DVector::zeros(n)).collect();
        Ok(Self {
            sizes: sizes.to_vec(),
            weights,
            biases,
        })
    }

    /// Network with every parameter zero.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        Ok(Self {
            sizes: sizes.to_vec(),
            weights: sizes.windows(2).map(|w| DMatrix::zeros(w[1], w[0])).collect(),
            biases: sizes[1..].iter().map(|&n| DVector::zeros(n)).collect(),
        })
    }

    /// Builds a network from explicit parameters, checking shapes.
    pub fn from_parameters(weights: Vec<DMatrix<f64>>, biases: Vec<DVector<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(ShootError::InvalidModel("weight and bias counts differ".into()));
        }
        let mut sizes = vec![weights[0].ncols()];
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.ncols() != sizes[l] || w.nrows() != b.len() {
                return Err(ShootError::InvalidModel(format!("layer {l} has inconsistent shape")));
            }
            sizes.push(w.nrows());
        }
        check_sizes(&sizes)?;
        let mlp = Self {
            sizes,
            weights,
            biases,
        };
        if !mlp.is_finite() {
            return Err(ShootError::InvalidModel("non-finite parameter".into()));
        }
        Ok(mlp)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn weights(&self) -> &[DMatrix<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[DVector<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [DMatrix<f64>] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [DVector<f64>] {
        &mut self.biases
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Inference on a batch (`input_dim × B`).
    pub fn forward(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let last = self.weights.len() - 1;
        let mut a = x.clone();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w * &a;
            for mut col in z.column_iter_mut() {
                col += b;
            }
            if l < last {
                z.apply(|v| *v = sigmoid(*v));
            }
            a = z;
        }
        a
    }

    /// Forward pass with inverted dropout at rate `dropout.0` on every
    /// hidden layer.
    pub fn forward_train<R: Rng + ?Sized>(&self, x: &DMatrix<f64>, dropout: (f64, &mut R)) -> DMatrix<f64> {
        let mut cache = self.forward_cached(x, Some(dropout));
        cache.a.pop().expect("output layer")
    }

    fn forward_cached<R: Rng + ?Sized>(
        &self,
        x: &DMatrix<f64>,
        mut dropout: Option<(f64, &mut R)>,
    ) -> Cache {
        let last = self.weights.len() - 1;
        let mut cache = Cache {
            a: vec![x.clone()],
            s: Vec::with_capacity(last),
            masks: Vec::with_capacity(last),
        };
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w * &cache.a[l];
            for mut col in z.column_iter_mut() {
                col += b;
            }
            if l == last {
                cache.a.push(z);
                break;
            }
            z.apply(|v| *v = sigmoid(*v));
            let mask = match dropout.as_mut() {
                Some((p, rng)) if *p > 0.0 => {
                    let keep = 1.0 - *p;
                    Some(DMatrix::from_fn(z.nrows(), z.ncols(), |_, _| {
                        if rng.gen::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    }))
                }
                _ => None,
            };
            let a = match &mask {
                Some(m) => z.component_mul(m),
                None => z.clone(),
            };
            cache.s.push(z);
            cache.masks.push(mask);
            cache.a.push(a);
        }
        cache
    }

    /// Mean squared error over all outputs of a batch.
    pub fn loss(&self, x: &DMatrix<f64>, t: &DMatrix<f64>) -> f64 {
        let d = self.forward(x) - t;
        d.norm_squared() / d.len() as f64
    }

    /// Mean squared error and its gradient. `dropout` gives the drop rate
    /// and the mask stream; `None` evaluates the deterministic network.
    pub fn loss_and_gradients<R: Rng + ?Sized>(
        &self,
        x: &DMatrix<f64>,
        t: &DMatrix<f64>,
        dropout: Option<(f64, &mut R)>,
    ) -> (f64, Gradients) {
        let cache = self.forward_cached(x, dropout);
        let y = &cache.a[cache.a.len() - 1];
        let diff = y - t;
        let count = diff.len() as f64;
        let loss = diff.norm_squared() / count;

        let mut grads = Gradients::zeros_like(self);
        let mut delta = diff * (2.0 / count);
        for l in (0..self.weights.len()).rev() {
            grads.weights[l] = &delta * cache.a[l].transpose();
            grads.biases[l] = delta.column_sum();
            if l == 0 {
                break;
            }
            let mut back = self.weights[l].transpose() * &delta;
            let s = &cache.s[l - 1];
            back.zip_apply(s, |g, sv| *g *= sv * (1.0 - sv));
            if let Some(m) = &cache.masks[l - 1] {
                back.component_mul_assign(m);
            }
            delta = back;
        }
        (loss, grads)
    }

    /// Upper bound on the Euclidean Lipschitz constant of the network:
    /// product of the layer spectral norms times 1/4 per sigmoid layer.
    pub fn lipschitz_bound(&self) -> f64 {
        let hidden = self.weights.len() - 1;
        self.weights
            .iter()
            .map(|w| w.clone().svd(false, false).singular_values.max())
            .product::<f64>()
            * 0.25f64.powi(hidden as i32)
    }
}

/// Adam moment constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam optimizer state for one network.
#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    m: Gradients,
    v: Gradients,
    step: i32,
}

impl Adam {
    pub fn new(mlp: &Mlp, cfg: AdamConfig) -> Self {
        Self {
            cfg,
            m: Gradients::zeros_like(mlp),
            v: Gradients::zeros_like(mlp),
            step: 0,
        }
    }

    /// One bias-corrected update with learning rate `lr`.
    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients, lr: f64) {
        self.step += 1;
        let AdamConfig {
            beta1,
            beta2,
            epsilon,
        } = self.cfg;
        let c1 = 1.0 - beta1.powi(self.step);
        let c2 = 1.0 - beta2.powi(self.step);
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + epsilon);
        };
        for l in 0..mlp.weights.len() {
            let (w, gw) = (&mut mlp.weights[l], &grads.weights[l]);
            let (mw, vw) = (&mut self.m.weights[l], &mut self.v.weights[l]);
            for i in 0..w.len() {
                update(&mut w[i], gw[i], &mut mw[i], &mut vw[i]);
            }
            let (b, gb) = (&mut mlp.biases[l], &grads.biases[l]);
            let (mb, vb) = (&mut self.m.biases[l], &mut self.v.biases[l]);
            for i in 0..b.len() {
                update(&mut b[i], gb[i], &mut mb[i], &mut vb[i]);
            }
        }
    }
}

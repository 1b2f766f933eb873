//! Dense feedforward network with Adam, written directly against ndarray.
//!
//! Weights are kept in f32: the regression targets are price-scale values
//! where single precision is ample, and it roughly doubles single-core GEMM
//! throughput, which is what training time is made of. Everything here is
//! strictly sequential and allocation patterns are fixed, so a fit is a pure
//! function of (data, config, seed).

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::rng::{self, Rng};

use super::OutputActivation;

fn softplus(z: f32) -> f32 {
    // max(z, 0) + ln(1 + exp(-|z|)) is exact for large |z| and never overflows.
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f32) -> f32 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Dense {
    /// (fan_in, fan_out), applied as `a.dot(&w) + b`.
    pub w: Array2<f32>,
    pub b: Array1<f32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Mlp {
    pub layers: Vec<Dense>,
    pub output: OutputActivation,
}

impl Mlp {
    /// He-initialized network over the given layer sizes
    /// (input, hidden..., output).
    pub fn new(sizes: &[usize], output: OutputActivation, rng: &mut Rng) -> Mlp {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let layers = sizes
            .windows(2)
            .map(|io| {
                let (fan_in, fan_out) = (io[0], io[1]);
                let std = (2.0 / fan_in as f64).sqrt();
                let w = Array2::from_shape_fn((fan_in, fan_out), |_| {
                    (rng::standard_normal(rng) * std) as f32
                });
                Dense { w, b: Array1::zeros(fan_out) }
            })
            .collect();
        Mlp { layers, output }
    }

    fn apply_output(&self, z: &mut Array2<f32>) {
        match self.output {
            OutputActivation::Relu => z.mapv_inplace(|v| v.max(0.0)),
            OutputActivation::Softplus => z.mapv_inplace(softplus),
        }
    }

    /// Inference pass; the output column for each input row.
    pub fn forward(&self, x: &Array2<f32>) -> Array2<f32> {
        let n_layers = self.layers.len();
        let mut a = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.w) + &layer.b;
            if i + 1 < n_layers {
                z.mapv_inplace(|v| v.max(0.0));
            } else {
                self.apply_output(&mut z);
            }
            a = z;
        }
        a
    }

    /// Mean squared error of the network on (x, y), accumulated in f64.
    pub fn mse(&self, x: &Array2<f32>, y: &[f32]) -> f64 {
        debug_assert_eq!(x.nrows(), y.len());
        let mut sum = 0.0f64;
        let mut seen = 0usize;
        // Chunked so evaluation never materializes huge activation matrices.
        for (xc, yc) in x.axis_chunks_iter(Axis(0), 2048).zip(y.chunks(2048)) {
            let pred = self.forward(&xc.to_owned());
            for (p, t) in pred.column(0).iter().zip(yc) {
                let d = f64::from(p - t);
                sum += d * d;
            }
            seen += yc.len();
        }
        sum / seen as f64
    }
}

/// Adam optimizer state plus the training hyperparameters it applies.
pub(crate) struct Trainer {
    pub net: Mlp,
    lr: f32,
    reg: f32,
    step: i32,
    moments: Vec<(Array2<f32>, Array1<f32>)>,
    velocities: Vec<(Array2<f32>, Array1<f32>)>,
}

const BETA1: f32 = 0.9;
const BETA2: f32 = 0.999;
const EPSILON: f32 = 1e-8;

impl Trainer {
    pub fn new(net: Mlp, lr: f64, reg: f64) -> Trainer {
        let zeros = |net: &Mlp| {
            net.layers
                .iter()
                .map(|l| (Array2::zeros(l.w.raw_dim()), Array1::zeros(l.b.raw_dim())))
                .collect()
        };
        Trainer {
            moments: zeros(&net),
            velocities: zeros(&net),
            net,
            lr: lr as f32,
            reg: reg as f32,
            step: 0,
        }
    }

    /// One minibatch of forward, backprop and Adam updates. Returns the batch
    /// data loss (before regularization) so callers can watch for divergence.
    pub fn train_batch(&mut self, x: &Array2<f32>, y: &Array2<f32>) -> f64 {
        let n_layers = self.net.layers.len();
        let n = x.nrows() as f32;

        // Forward, caching pre-activations and activations.
        let mut zs: Vec<Array2<f32>> = Vec::with_capacity(n_layers);
        let mut activations: Vec<Array2<f32>> = Vec::with_capacity(n_layers + 1);
        activations.push(x.clone());
        for (i, layer) in self.net.layers.iter().enumerate() {
            let z = activations[i].dot(&layer.w) + &layer.b;
            let mut a = z.clone();
            if i + 1 < n_layers {
                a.mapv_inplace(|v| v.max(0.0));
            } else {
                self.net.apply_output(&mut a);
            }
            zs.push(z);
            activations.push(a);
        }

        let pred = &activations[n_layers];
        let mut loss = 0.0f64;
        for (p, t) in pred.iter().zip(y.iter()) {
            let d = f64::from(p - t);
            loss += d * d;
        }
        loss /= f64::from(n);

        // Output delta: dL/dz = 2 (pred - y) / n * act'(z).
        let mut delta = pred - y;
        delta.mapv_inplace(|v| v * 2.0 / n);
        match self.net.output {
            OutputActivation::Relu => {
                delta.zip_mut_with(&zs[n_layers - 1], |d, &z| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
            }
            OutputActivation::Softplus => {
                delta.zip_mut_with(&zs[n_layers - 1], |d, &z| *d *= sigmoid(z));
            }
        }

        // Backpropagate and update layer by layer, deepest first.
        self.step += 1;
        let bc1 = 1.0 - BETA1.powi(self.step);
        let bc2 = 1.0 - BETA2.powi(self.step);
        for i in (0..n_layers).rev() {
            let mut grad_w = activations[i].t().dot(&delta);
            if self.reg != 0.0 {
                grad_w.scaled_add(2.0 * self.reg, &self.net.layers[i].w);
            }
            let grad_b = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut next = delta.dot(&self.net.layers[i].w.t());
                next.zip_mut_with(&zs[i - 1], |d, &z| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = next;
            }
            let layer = &mut self.net.layers[i];
            let (mw, mb) = &mut self.moments[i];
            let (vw, vb) = &mut self.velocities[i];
            adam_update(&mut layer.w, &grad_w, mw, vw, self.lr, bc1, bc2);
            adam_update_1d(&mut layer.b, &grad_b, mb, vb, self.lr, bc1, bc2);
        }
        loss
    }
}

fn adam_update(
    param: &mut Array2<f32>,
    grad: &Array2<f32>,
    m: &mut Array2<f32>,
    v: &mut Array2<f32>,
    lr: f32,
    bc1: f32,
    bc2: f32,
) {
    ndarray::Zip::from(param).and(grad).and(m).and(v).for_each(|p, &g, m, v| {
        *m = BETA1 * *m + (1.0 - BETA1) * g;
        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
        *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + EPSILON);
    });
}

fn adam_update_1d(
    param: &mut Array1<f32>,
    grad: &Array1<f32>,
    m: &mut Array1<f32>,
    v: &mut Array1<f32>,
    lr: f32,
    bc1: f32,
    bc2: f32,
) {
    ndarray::Zip::from(param).and(grad).and(m).and(v).for_each(|p, &g, m, v| {
        *m = BETA1 * *m + (1.0 - BETA1) * g;
        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
        *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + EPSILON);
    });
}

//! Small fully-connected network with rectified-linear hidden layers, a
//! linear head and an adaptive-moment optimizer. Written against `ndarray`
//! so batched forward/backward passes use the fast matrix product.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// One affine layer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dense {
    /// Weight matrix, shape (in, out).
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// MLP parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Cached activations from a forward pass, needed for the backward pass.
pub struct ForwardCache {
    /// Layer inputs: activations[0] is the network input.
    activations: Vec<Array2<f64>>,
}

impl Mlp {
    /// Layer sizes, e.g. `[200, 60, 60, 3]`. Weights start uniform in
    /// +-1/sqrt(fan_in).
    pub fn new<R: Rng>(sizes: &[usize], rng: &mut R) -> Self {
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let bound = 1.0 / (n_in as f64).sqrt();
                Dense {
                    w: Array2::from_shape_fn((n_in, n_out), |_| rng.gen_range(-bound..bound)),
                    b: Array1::zeros(n_out),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().w.ncols()
    }

    /// Batched forward pass; rows are samples.
    pub fn forward_batch(&self, x: &Array2<f64>) -> (Array2<f64>, ForwardCache) {
        assert_eq!(x.ncols(), self.input_dim(), "input dimension mismatch");
        let mut activations = vec![x.clone()];
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = h.dot(&layer.w) + &layer.b;
            if i + 1 < self.layers.len() {
                z.mapv_inplace(|v| v.max(0.0));
            }
            activations.push(z.clone());
            h = z;
        }
        let out = activations.last().unwrap().clone();
        (out, ForwardCache { activations })
    }

    /// Forward pass for a single observation.
    pub fn forward(&self, obs: &[f64]) -> Vec<f64> {
        let x = Array2::from_shape_vec((1, obs.len()), obs.to_vec()).unwrap();
        let (out, _) = self.forward_batch(&x);
        out.row(0).to_vec()
    }

    /// Backpropagate `dout` (gradient of the loss w.r.t. the network output)
    /// through the cached pass and return per-layer gradients.
    pub fn backward(&self, cache: &ForwardCache, dout: &Array2<f64>) -> Vec<Dense> {
        let n_layers = self.layers.len();
        let mut grads: Vec<Dense> = Vec::with_capacity(n_layers);
        let mut delta = dout.clone();
        for i in (0..n_layers).rev() {
            // ReLU mask on hidden outputs (the stored activation is post-ReLU).
            if i + 1 < n_layers {
                let act = &cache.activations[i + 1];
                delta.zip_mut_with(act, |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
            }
            let input = &cache.activations[i];
            let gw = input.t().dot(&delta);
            let gb = delta.sum_axis(Axis(0));
            grads.push(Dense { w: gw, b: gb });
            if i > 0 {
                delta = delta.dot(&self.layers[i].w.t());
            }
        }
        grads.reverse();
        grads
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.w.iter());
            out.extend(l.b.iter());
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        for l in &mut self.layers {
            for v in l.w.iter_mut() {
                *v = *it.next().unwrap();
            }
            for v in l.b.iter_mut() {
                *v = *it.next().unwrap();
            }
        }
        assert!(it.next().is_none());
    }
}

/// Argmax with lowest-index tie breaking.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Adaptive-moment optimizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<Dense>,
    v: Vec<Dense>,
}

impl Adam {
    pub fn new(net: &Mlp, lr: f64) -> Self {
        let zeros = |l: &Dense| Dense {
            w: Array2::zeros(l.w.dim()),
            b: Array1::zeros(l.b.dim()),
        };
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: net.layers.iter().map(zeros).collect(),
            v: net.layers.iter().map(zeros).collect(),
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &[Dense]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for ((layer, grad), (m, v)) in net
            .layers
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64,
                          lr: f64, b1: f64, b2: f64, eps: f64| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let mh = *m / bc1;
                let vh = *v / bc2;
                *p -= lr * mh / (vh.sqrt() + eps);
            };
            for ((p, &g), (m, v)) in layer
                .w
                .iter_mut()
                .zip(grad.w.iter())
                .zip(m.w.iter_mut().zip(v.w.iter_mut()))
            {
                update(p, g, m, v, self.lr, self.beta1, self.beta2, self.eps);
            }
            for ((p, &g), (m, v)) in layer
                .b
                .iter_mut()
                .zip(grad.b.iter())
                .zip(m.b.iter_mut().zip(v.b.iter_mut()))
            {
                update(p, g, m, v, self.lr, self.beta1, self.beta2, self.eps);
            }
        }
    }
}

/// Smooth-L1 (Huber, delta = 1) value and derivative w.r.t. the prediction.
pub fn huber(pred: f64, target: f64) -> (f64, f64) {
    let d = pred - target;
    if d.abs() <= 1.0 {
        (0.5 * d * d, d)
    } else {
        (d.abs() - 0.5, d.signum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_output_biases() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = Mlp::new(&[4, 3, 2], &mut rng);
        for l in &mut net.layers {
            l.w.fill(0.0);
        }
        net.layers[1].b = ndarray::arr1(&[0.7, -0.3]);
        let out = net.forward(&[1.0, 2.0, 3.0, 4.0]);
        assert_abs_diff_eq!(out[0], 0.7);
        assert_abs_diff_eq!(out[1], -0.3);
    }

    #[test]
    fn linear_head_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = Mlp::new(&[5, 4, 3], &mut rng);
        let obs = [0.3, -0.1, 0.9, 0.5, 0.2];
        let base = net.forward(&obs);
        let last = net.layers.len() - 1;
        net.layers[last].w.mapv_inplace(|v| v * 2.0);
        net.layers[last].b.mapv_inplace(|v| v * 2.0);
        let scaled = net.forward(&obs);
        for (b, s) in base.iter().zip(&scaled) {
            assert_abs_diff_eq!(s, &(2.0 * b), epsilon = 1e-12);
        }
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[1.0, 2.0, 3.0]), 2);
        assert_eq!(argmax(&[5.0, 5.0, 1.0]), 0);
        let q = [1.0, 3.0, 2.0];
        let shifted: Vec<f64> = q.iter().map(|v| v + 10.0).collect();
        assert_eq!(argmax(&q), argmax(&shifted));
    }

    /// Central-difference gradient check of a Huber loss over the full
    /// network, including per-sample importance weights.
    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..5 {
            let mut net = Mlp::new(&[6, 5, 4, 3], &mut rng);
            let batch = 4;
            let x = Array2::from_shape_fn((batch, 6), |_| rng.gen_range(-1.0..1.0));
            let targets: Vec<f64> = (0..batch).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let actions: Vec<usize> = (0..batch).map(|_| rng.gen_range(0..3)).collect();
            let weights: Vec<f64> = (0..batch).map(|_| rng.gen_range(0.2..1.0)).collect();

            let loss_of = |net: &Mlp| -> f64 {
                let (out, _) = net.forward_batch(&x);
                (0..batch)
                    .map(|i| weights[i] * huber(out[(i, actions[i])], targets[i]).0)
                    .sum::<f64>()
                    / batch as f64
            };

            let (out, cache) = net.forward_batch(&x);
            let mut dout = Array2::zeros((batch, 3));
            for i in 0..batch {
                let (_, dl) = huber(out[(i, actions[i])], targets[i]);
                dout[(i, actions[i])] = weights[i] * dl / batch as f64;
            }
            let grads = net.backward(&cache, &dout);

            let flat_grads: Vec<f64> = {
                let mut v = Vec::new();
                for g in &grads {
                    v.extend(g.w.iter());
                    v.extend(g.b.iter());
                }
                v
            };
            let mut flat = net.flat_params();
            let h = 1e-6;
            for (idx, g) in flat_grads.iter().enumerate().step_by(7) {
                let orig = flat[idx];
                flat[idx] = orig + h;
                net.set_flat_params(&flat);
                let lp = loss_of(&net);
                flat[idx] = orig - h;
                net.set_flat_params(&flat);
                let lm = loss_of(&net);
                flat[idx] = orig;
                net.set_flat_params(&flat);
                let fd = (lp - lm) / (2.0 * h);
                let denom = fd.abs().max(g.abs()).max(1e-8);
                assert!(
                    (fd - g).abs() / denom < 1e-4,
                    "trial {trial} param {idx}: fd={fd} analytic={g}"
                );
            }
        }
    }

    #[test]
    fn adam_reduces_quadratic_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut net = Mlp::new(&[3, 8, 1], &mut rng);
        let mut opt = Adam::new(&net, 1e-2);
        let x = Array2::from_shape_fn((16, 3), |_| rng.gen_range(-1.0..1.0));
        let y: Vec<f64> = x.rows().into_iter().map(|r| r[0] - 0.5 * r[2]).collect();
        let loss = |net: &Mlp| {
            let (out, _) = net.forward_batch(&x);
            (0..16).map(|i| (out[(i, 0)] - y[i]).powi(2)).sum::<f64>() / 16.0
        };
        let before = loss(&net);
        for _ in 0..500 {
            let (out, cache) = net.forward_batch(&x);
            let mut dout = Array2::zeros((16, 1));
            for i in 0..16 {
                dout[(i, 0)] = 2.0 * (out[(i, 0)] - y[i]) / 16.0;
            }
            let grads = net.backward(&cache, &dout);
            opt.step(&mut net, &grads);
        }
        assert!(loss(&net) < before / 10.0);
    }
}

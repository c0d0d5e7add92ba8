//! Fully connected network with ReLU hidden layers and manual backprop.
//!
//! Parameters live in one flat vector so optimisers, Polyak averaging and
//! checkpoints treat a network as a plain slice. Layer `l` stores its
//! weights row-major as `in × out`, followed by `out` biases.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations kept from a forward pass. `inputs[l]` is the input of layer l.
#[derive(Debug, Clone)]
pub struct Cache {
    batch: usize,
    inputs: Vec<Vec<f64>>,
}

/// C (m×n) = alpha·op(A)·op(B) + beta·C with explicit strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    debug_assert!(c.len() >= m * n);
    // SAFETY: strides and extents describe in-bounds views of the slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

impl Mlp {
    /// Weights and biases uniform in ±1/sqrt(fan_in).
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes);
        let mut offset = 0;
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            let count = w[0] * w[1] + w[1];
            for p in &mut net.params[offset..offset + count] {
                *p = rng.random_range(-bound..bound);
            }
            offset += count;
        }
        net
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "a network needs input and output sizes");
        let count = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; count],
        }
    }

    /// Rebuilds a network from its sizes and a flat parameter vector.
    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Option<Self> {
        let net = Self::zeros(sizes);
        (net.params.len() == params.len()).then(|| Self {
            sizes: sizes.to_vec(),
            params,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("non-empty")
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut offset = 0;
        self.sizes.windows(2).map(move |w| {
            let at = offset;
            offset += w[0] * w[1] + w[1];
            (at, w[0], w[1])
        })
    }

    /// Forward pass over `batch` row-major inputs, keeping activations.
    pub fn forward(&self, x: &[f64], batch: usize) -> (Vec<f64>, Cache) {
        assert_eq!(x.len(), batch * self.input_dim(), "input shape");
        let depth = self.sizes.len() - 1;
        let mut inputs = Vec::with_capacity(depth);
        let mut h = x.to_vec();
        for (l, (at, fan_in, fan_out)) in self.layers().enumerate() {
            let w = &self.params[at..at + fan_in * fan_out];
            let b = &self.params[at + fan_in * fan_out..at + fan_in * fan_out + fan_out];
            let mut y: Vec<f64> = Vec::with_capacity(batch * fan_out);
            for _ in 0..batch {
                y.extend_from_slice(b);
            }
            gemm(batch, fan_in, fan_out, &h, (fan_in, 1), w, (fan_out, 1), 1.0, &mut y);
            if l + 1 < depth {
                y.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            inputs.push(std::mem::replace(&mut h, y));
        }
        (h, Cache { batch, inputs })
    }

    pub fn predict(&self, x: &[f64], batch: usize) -> Vec<f64> {
        self.forward(x, batch).0
    }

    /// Accumulates dL/dθ into `grad` and returns dL/dx for upstream `dy`.
    pub fn backward(&self, cache: &Cache, dy: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let batch = cache.batch;
        assert_eq!(dy.len(), batch * self.output_dim(), "upstream shape");
        assert_eq!(grad.len(), self.params.len(), "gradient shape");
        let layers: Vec<_> = self.layers().collect();
        let mut delta = dy.to_vec();
        for (l, &(at, fan_in, fan_out)) in layers.iter().enumerate().rev() {
            let x = &cache.inputs[l];
            let (gw, gb) = grad[at..at + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
            // dW = xᵀ·δ
            gemm(fan_in, batch, fan_out, x, (1, fan_in), &delta, (fan_out, 1), 1.0, gw);
            for row in delta.chunks_exact(fan_out) {
                for (g, d) in gb.iter_mut().zip(row) {
                    *g += d;
                }
            }
            // dx = δ·Wᵀ
            let w = &self.params[at..at + fan_in * fan_out];
            let mut dx = vec![0.0; batch * fan_in];
            gemm(batch, fan_out, fan_in, &delta, (fan_out, 1), w, (1, fan_out), 0.0, &mut dx);
            if l > 0 {
                // x is a ReLU output: it is positive exactly where the unit was active.
                for (d, &xi) in dx.iter_mut().zip(x) {
                    if xi <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            delta = dx;
        }
        delta
    }
}

//! Minimal dense network: tanh hidden layers, linear output, parameters in
//! one flat array, and exact reverse-mode gradients. Any squashing of the
//! output is applied by the policy head, not here, so critics and actors
//! share the same machinery.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DrlError;
use crate::scalar::Scalar;

/// Fully connected network. Layer `l` maps `sizes[l] -> sizes[l+1]` through
/// weights stored row-major (one row per output unit) followed by biases, so
/// the total parameter count is `sum((in + 1) * out)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet<F> {
    sizes: Vec<usize>,
    params: Vec<F>,
}

/// Per-layer activations recorded by [`DenseNet::forward_cached`], consumed
/// by [`DenseNet::backward`].
pub struct ForwardCache<F> {
    /// `activations[0]` is the input; `activations[l+1]` the output of
    /// layer `l` (post-tanh for hidden layers, linear for the last).
    activations: Vec<Vec<F>>,
}

impl<F: Scalar> ForwardCache<F> {
    pub fn output(&self) -> &[F] {
        self.activations.last().expect("cache is never empty")
    }
}

impl<F: Scalar> DenseNet<F> {
    /// Builds a net with fan-in-scaled uniform weights (`U(-1/sqrt(in),
    /// 1/sqrt(in))`) and zero biases, drawn from the given generator.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output layers");
        assert!(sizes.iter().all(|&s| s > 0), "layer sizes must be positive");
        let mut params = Vec::with_capacity(Self::param_count_for(sizes));
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(F::of(rng.random_range(-bound..bound)));
            }
            for _ in 0..fan_out {
                params.push(F::zero());
            }
        }
        Self {
            sizes: sizes.to_vec(),
            params,
        }
    }

    /// Reconstructs a net from its flat parameters (checkpoint loading).
    pub fn from_params(sizes: &[usize], params: Vec<F>) -> Result<Self, DrlError> {
        let expect = Self::param_count_for(sizes);
        if params.len() != expect {
            return Err(DrlError::ShapeMismatch {
                expected: expect,
                got: params.len(),
            });
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params,
        })
    }

    pub fn param_count_for(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    pub fn params(&self) -> &[F] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    /// Runs the net, recording per-layer activations for [`Self::backward`].
    pub fn forward_cached(&self, input: &[F]) -> Result<ForwardCache<F>, DrlError> {
        if input.len() != self.input_size() {
            return Err(DrlError::ShapeMismatch {
                expected: self.input_size(),
                got: input.len(),
            });
        }
        let layers = self.sizes.len() - 1;
        let mut activations = Vec::with_capacity(layers + 1);
        activations.push(input.to_vec());
        let mut offset = 0;
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let biases = &self.params[offset + n_in * n_out..offset + (n_in + 1) * n_out];
            offset += (n_in + 1) * n_out;

            let x = &activations[l];
            let mut out = Vec::with_capacity(n_out);
            for o in 0..n_out {
                let row = &weights[o * n_in..(o + 1) * n_in];
                let mut z = biases[o];
                for i in 0..n_in {
                    z += row[i] * x[i];
                }
                out.push(if l + 1 == layers { z } else { z.tanh() });
            }
            activations.push(out);
        }
        Ok(ForwardCache { activations })
    }

    /// Plain forward pass.
    pub fn forward(&self, input: &[F]) -> Result<Vec<F>, DrlError> {
        Ok(self.forward_cached(input)?.output().to_vec())
    }

    /// Reverse-mode pass. `output_grad` is dLoss/dOutput; returns
    /// (dLoss/dParams flat like [`Self::params`], dLoss/dInput).
    pub fn backward(
        &self,
        cache: &ForwardCache<F>,
        output_grad: &[F],
    ) -> Result<(Vec<F>, Vec<F>), DrlError> {
        if output_grad.len() != self.output_size() {
            return Err(DrlError::ShapeMismatch {
                expected: self.output_size(),
                got: output_grad.len(),
            });
        }
        let layers = self.sizes.len() - 1;
        let mut param_grads = vec![F::zero(); self.params.len()];
        let mut upstream = output_grad.to_vec();

        // Byte offsets of each layer's parameter block.
        let mut offsets = Vec::with_capacity(layers);
        let mut acc = 0;
        for l in 0..layers {
            offsets.push(acc);
            acc += (self.sizes[l] + 1) * self.sizes[l + 1];
        }

        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let offset = offsets[l];
            let x = &cache.activations[l];
            let y = &cache.activations[l + 1];

            // dLoss/dz, undoing tanh on hidden layers.
            let dz: Vec<F> = if l + 1 == layers {
                upstream.clone()
            } else {
                upstream
                    .iter()
                    .zip(y)
                    .map(|(&g, &a)| g * (F::one() - a * a))
                    .collect()
            };

            let (w_grads, b_grads) = param_grads[offset..offset + (n_in + 1) * n_out]
                .split_at_mut(n_in * n_out);
            let mut dx = vec![F::zero(); n_in];
            let weights = &self.params[offset..offset + n_in * n_out];
            for o in 0..n_out {
                let g = dz[o];
                b_grads[o] = g;
                let w_row = &weights[o * n_in..(o + 1) * n_in];
                let grad_row = &mut w_grads[o * n_in..(o + 1) * n_in];
                for i in 0..n_in {
                    grad_row[i] = g * x[i];
                    dx[i] += g * w_row[i];
                }
            }
            upstream = dx;
        }

        Ok((param_grads, upstream))
    }
}

/// target <- (1 - tau) * target + tau * online, elementwise over the flat
/// parameters. Nets must share an architecture.
pub fn polyak_update<F: Scalar>(target: &mut DenseNet<F>, online: &DenseNet<F>, tau: F) {
    assert_eq!(target.sizes, online.sizes, "polyak across identical shapes");
    let keep = F::one() - tau;
    for (t, &o) in target.params.iter_mut().zip(online.params.iter()) {
        *t = keep * *t + tau * o;
    }
}

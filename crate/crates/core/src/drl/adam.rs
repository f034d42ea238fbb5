//! Adam optimizer over a flat parameter array, with bias correction.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adam<F> {
    lr: F,
    beta1: F,
    beta2: F,
    eps: F,
    t: u64,
    m: Vec<F>,
    v: Vec<F>,
}

impl<F: Scalar> Adam<F> {
    pub fn new(param_count: usize, lr: F) -> Self {
        Self {
            lr,
            beta1: F::of(0.9),
            beta2: F::of(0.999),
            eps: F::of(1e-8),
            t: 0,
            m: vec![F::zero(); param_count],
            v: vec![F::zero(); param_count],
        }
    }

    pub fn lr(&self) -> F {
        self.lr
    }

    pub fn set_lr(&mut self, lr: F) {
        self.lr = lr;
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// Applies one descent step in place. `params` and `grads` must match
    /// the length the optimizer was built for.
    pub fn step(&mut self, params: &mut [F], grads: &[F]) {
        assert_eq!(params.len(), self.m.len(), "optimizer/parameter mismatch");
        assert_eq!(grads.len(), self.m.len(), "optimizer/gradient mismatch");
        self.t += 1;
        let t = self.t as i32;
        let bc1 = F::one() - self.beta1.powi(t);
        let bc2 = F::one() - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (F::one() - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (F::one() - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

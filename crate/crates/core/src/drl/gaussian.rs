//! Diagonal-Gaussian policy math: log-densities, the tanh-squash change of
//! variables, and their closed-form derivatives with respect to the policy
//! head outputs. Keeping these formulas in one place lets the finite
//! difference tests pin them down independently of any algorithm.

use crate::scalar::Scalar;

/// Clamp range for policy log standard deviations.
pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

/// Numerically safe `log(1 + exp(x))`.
pub fn softplus<F: Scalar>(x: F) -> F {
    x.max(F::zero()) + (F::one() + (-x.abs()).exp()).ln()
}

/// `log(1 - tanh(u)^2)` without catastrophic cancellation for large `|u|`,
/// via the identity `2 * (ln 2 - u - softplus(-2u))`.
pub fn log_one_minus_tanh_sq<F: Scalar>(u: F) -> F {
    let two = F::of(2.0);
    two * (F::of(2.0_f64.ln()) - u - softplus(-two * u))
}

fn half_ln_two_pi<F: Scalar>() -> F {
    F::of(0.5 * (2.0 * std::f64::consts::PI).ln())
}

/// Log-density of a diagonal Gaussian at `x`.
pub fn diag_gaussian_log_prob<F: Scalar>(mu: &[F], log_std: &[F], x: &[F]) -> F {
    debug_assert_eq!(mu.len(), log_std.len());
    debug_assert_eq!(mu.len(), x.len());
    let mut lp = F::zero();
    for i in 0..mu.len() {
        let std = log_std[i].exp();
        let z = (x[i] - mu[i]) / std;
        lp += -F::of(0.5) * z * z - log_std[i] - half_ln_two_pi::<F>();
    }
    lp
}

/// Gradients of [`diag_gaussian_log_prob`] with respect to `mu` and
/// `log_std`, holding `x` fixed (the likelihood-ratio view used by PPO).
pub fn diag_gaussian_log_prob_grads<F: Scalar>(
    mu: &[F],
    log_std: &[F],
    x: &[F],
) -> (Vec<F>, Vec<F>) {
    let mut d_mu = Vec::with_capacity(mu.len());
    let mut d_log_std = Vec::with_capacity(mu.len());
    for i in 0..mu.len() {
        let var = (F::of(2.0) * log_std[i]).exp();
        let diff = x[i] - mu[i];
        d_mu.push(diff / var);
        d_log_std.push(diff * diff / var - F::one());
    }
    (d_mu, d_log_std)
}

/// Entropy of a diagonal Gaussian: `sum(log_std) + d/2 * log(2*pi*e)`.
pub fn diag_gaussian_entropy<F: Scalar>(log_std: &[F]) -> F {
    let per_dim = half_ln_two_pi::<F>() + F::of(0.5);
    log_std.iter().fold(F::zero(), |acc, &ls| acc + ls + per_dim)
}

/// A tanh-squashed Gaussian sample and everything needed to differentiate
/// through it with the noise held fixed (the reparameterization trick).
#[derive(Debug, Clone)]
pub struct SquashedSample<F> {
    /// Pre-squash draw `u = mu + std * eps`.
    pub u: Vec<F>,
    /// Squashed action `a = tanh(u)`, each component in `(-1, 1)`.
    pub a: Vec<F>,
    /// `log pi(a | s)` including the tanh change-of-variables correction.
    pub log_prob: F,
}

/// Draws the squashed action for fixed standard-normal noise `eps`.
/// `log_std` is clamped to `[LOG_STD_MIN, LOG_STD_MAX]` before use.
pub fn squash_sample<F: Scalar>(mu: &[F], log_std: &[F], eps: &[F]) -> SquashedSample<F> {
    debug_assert_eq!(mu.len(), log_std.len());
    debug_assert_eq!(mu.len(), eps.len());
    let n = mu.len();
    let mut u = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut log_prob = F::zero();
    for i in 0..n {
        let ls = clamp_log_std(log_std[i]);
        let std = ls.exp();
        let ui = mu[i] + std * eps[i];
        let ai = ui.tanh();
        log_prob += -F::of(0.5) * eps[i] * eps[i] - ls - half_ln_two_pi::<F>()
            - log_one_minus_tanh_sq(ui);
        u.push(ui);
        a.push(ai);
    }
    SquashedSample { u, a, log_prob }
}

pub fn clamp_log_std<F: Scalar>(ls: F) -> F {
    ls.max(F::of(LOG_STD_MIN)).min(F::of(LOG_STD_MAX))
}

/// Pathwise derivatives of a squashed sample with the noise fixed:
///
/// * `d log_prob / d mu_i      = 2 a_i`
/// * `d log_prob / d log_std_i = -1 + 2 a_i std_i eps_i`
/// * `d a_i / d mu_i           = 1 - a_i^2`
/// * `d a_i / d log_std_i      = (1 - a_i^2) std_i eps_i`
///
/// All cross-terms vanish because the distribution is diagonal. The log_std
/// derivatives are zero where the clamp is active.
#[derive(Debug, Clone)]
pub struct SquashedGrads<F> {
    pub dlogp_dmu: Vec<F>,
    pub dlogp_dlog_std: Vec<F>,
    pub da_dmu: Vec<F>,
    pub da_dlog_std: Vec<F>,
}

pub fn squash_grads<F: Scalar>(log_std: &[F], eps: &[F], sample: &SquashedSample<F>) -> SquashedGrads<F> {
    let n = log_std.len();
    let mut g = SquashedGrads {
        dlogp_dmu: Vec::with_capacity(n),
        dlogp_dlog_std: Vec::with_capacity(n),
        da_dmu: Vec::with_capacity(n),
        da_dlog_std: Vec::with_capacity(n),
    };
    let two = F::of(2.0);
    for i in 0..n {
        let ai = sample.a[i];
        let clamped = clamp_log_std(log_std[i]);
        let active = clamped != log_std[i];
        let std = clamped.exp();
        let sech2 = F::one() - ai * ai;
        g.dlogp_dmu.push(two * ai);
        g.da_dmu.push(sech2);
        if active {
            g.dlogp_dlog_std.push(F::zero());
            g.da_dlog_std.push(F::zero());
        } else {
            g.dlogp_dlog_std.push(-F::one() + two * ai * std * eps[i]);
            g.da_dlog_std.push(sech2 * std * eps[i]);
        }
    }
    g
}

//! Generalized advantage estimation over a collected rollout.

use crate::scalar::Scalar;

use super::DrlError;

/// Computes advantages and value targets for a rollout of length `T`.
///
/// `values[t]` is the critic's estimate at step `t`; `last_value` bootstraps
/// past the rollout end. A step marked done cuts the bootstrap: the temporal
/// difference there ignores the next value and the recursion restarts.
///
/// Returns `(advantages, returns)` where `returns[t] = advantages[t] +
/// values[t]` serves as the value-function regression target.
pub fn gae<F: Scalar>(
    rewards: &[F],
    values: &[F],
    dones: &[bool],
    last_value: F,
    gamma: F,
    lambda: F,
) -> Result<(Vec<F>, Vec<F>), DrlError> {
    let t_max = rewards.len();
    if values.len() != t_max || dones.len() != t_max {
        return Err(DrlError::LengthMismatch {
            what: "rollout arrays",
            expected: t_max,
            got: values.len().max(dones.len()).min(values.len().min(dones.len())),
        });
    }
    if t_max == 0 {
        return Err(DrlError::RolloutTooShort { have: 0 });
    }

    let mut advantages = vec![F::zero(); t_max];
    let mut carry = F::zero();
    for t in (0..t_max).rev() {
        let not_done = if dones[t] { F::zero() } else { F::one() };
        let next_value = if t + 1 == t_max { last_value } else { values[t + 1] };
        let delta = rewards[t] + gamma * next_value * not_done - values[t];
        carry = delta + gamma * lambda * not_done * carry;
        advantages[t] = carry;
    }
    let returns = advantages
        .iter()
        .zip(values)
        .map(|(&a, &v)| a + v)
        .collect();
    Ok((advantages, returns))
}

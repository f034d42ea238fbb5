//! Proximal policy optimization with a clipped surrogate objective.
//!
//! The policy is a diagonal Gaussian over a pre-squash variable `u`: the
//! mean comes from a small network, the log standard deviations are a free
//! state-independent vector, and the executed action is `tanh(u)`. Log
//! probabilities and their gradients are taken in `u` space, so no
//! change-of-variables correction appears in the ratio. A separate network
//! regresses the value function against advantage-estimation returns.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::scalar::Scalar;

use super::adam::Adam;
use super::gae::gae;
use super::gaussian::{
    clamp_log_std, diag_gaussian_entropy, diag_gaussian_log_prob, diag_gaussian_log_prob_grads,
};
use super::net::DenseNet;
use super::sac::{draw_noise, net_sizes};
use super::{AgentConfig, DrlError};

#[derive(Debug, Clone)]
pub struct PpoNets<F> {
    /// Mean head: obs -> pre-squash action mean.
    pub actor: DenseNet<F>,
    /// Learned log standard deviations, one per action dimension.
    pub log_std: Vec<F>,
    /// State-value head: obs -> scalar.
    pub value: DenseNet<F>,
}

impl<F: Scalar> PpoNets<F> {
    pub fn new(obs_dim: usize, action_dim: usize, hidden: &[usize], rng: &mut impl Rng) -> Self {
        Self {
            actor: DenseNet::new(&net_sizes(obs_dim, hidden, action_dim), rng),
            log_std: vec![F::zero(); action_dim],
            value: DenseNet::new(&net_sizes(obs_dim, hidden, 1), rng),
        }
    }
}

/// On-policy experience collected between updates.
#[derive(Debug, Clone, Default)]
pub struct Rollout<F> {
    pub obs: Vec<Vec<F>>,
    /// Pre-squash draws `u`; the executed action was `tanh(u)`.
    pub pre_actions: Vec<Vec<F>>,
    pub rewards: Vec<F>,
    pub dones: Vec<bool>,
}

impl<F> Rollout<F> {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn clear(&mut self) {
        self.obs.clear();
        self.pre_actions.clear();
        self.rewards.clear();
        self.dones.clear();
    }
}

/// Normalizes advantages to zero mean and unit standard deviation
/// (population convention, epsilon-guarded).
pub fn normalize_advantages<F: Scalar>(adv: &mut [F]) {
    if adv.is_empty() {
        return;
    }
    let n = F::of(adv.len() as f64);
    let mean = adv.iter().fold(F::zero(), |s, &a| s + a) / n;
    let var = adv
        .iter()
        .fold(F::zero(), |s, &a| s + (a - mean) * (a - mean))
        / n;
    let denom = var.sqrt() + F::of(1e-8);
    for a in adv.iter_mut() {
        *a = (*a - mean) / denom;
    }
}

/// Clipped surrogate objective over one minibatch, with gradients for the
/// mean network and the log-std vector. `ent_coef` subtracts an entropy
/// bonus; the value head is handled separately.
#[allow(clippy::too_many_arguments)]
pub fn policy_loss_grads<F: Scalar>(
    actor: &DenseNet<F>,
    log_std: &[F],
    obs: &[Vec<F>],
    pre_actions: &[Vec<F>],
    logp_old: &[F],
    advantages: &[F],
    clip: F,
    ent_coef: F,
) -> Result<(F, Vec<F>, Vec<F>), DrlError> {
    let m = F::of(obs.len() as f64);
    let mut loss = F::zero();
    let mut net_grads = vec![F::zero(); actor.params().len()];
    let mut log_std_grads = vec![F::zero(); log_std.len()];

    for i in 0..obs.len() {
        let cache = actor.forward_cached(&obs[i])?;
        let mu = cache.output();
        let logp = diag_gaussian_log_prob(mu, log_std, &pre_actions[i]);
        let ratio = (logp - logp_old[i]).exp();
        let adv = advantages[i];
        let clipped = ratio.max(F::one() - clip).min(F::one() + clip);
        let surrogate = (ratio * adv).min(clipped * adv);
        loss -= surrogate / m;

        // The min picks the unclipped branch iff ratio*adv <= clipped*adv;
        // only that branch carries a gradient (the clipped one saturates).
        if ratio * adv <= clipped * adv {
            let dloss_dlogp = -adv * ratio / m;
            let (d_mu, d_ls) = diag_gaussian_log_prob_grads(mu, log_std, &pre_actions[i]);
            let head_grad: Vec<F> = d_mu.iter().map(|&g| g * dloss_dlogp).collect();
            let (pg, _) = actor.backward(&cache, &head_grad)?;
            for (acc, p) in net_grads.iter_mut().zip(pg) {
                *acc += p;
            }
            for (acc, g) in log_std_grads.iter_mut().zip(d_ls) {
                *acc += g * dloss_dlogp;
            }
        }
    }

    if ent_coef > F::zero() {
        loss -= ent_coef * diag_gaussian_entropy(log_std);
        for g in log_std_grads.iter_mut() {
            *g -= ent_coef;
        }
    }

    Ok((loss, net_grads, log_std_grads))
}

/// Weighted value regression `vf_coef * mean((V(s) - return)^2)` with its
/// parameter gradient.
pub fn value_loss_grads<F: Scalar>(
    value: &DenseNet<F>,
    obs: &[Vec<F>],
    returns: &[F],
    vf_coef: F,
) -> Result<(F, Vec<F>), DrlError> {
    let m = F::of(obs.len() as f64);
    let mut loss = F::zero();
    let mut grads = vec![F::zero(); value.params().len()];
    for i in 0..obs.len() {
        let cache = value.forward_cached(&obs[i])?;
        let err = cache.output()[0] - returns[i];
        loss += vf_coef * err * err / m;
        let (pg, _) = value.backward(&cache, &[F::of(2.0) * vf_coef * err / m])?;
        for (acc, p) in grads.iter_mut().zip(pg) {
            *acc += p;
        }
    }
    Ok((loss, grads))
}

#[derive(Debug, Clone, Copy)]
pub struct PpoLosses<F> {
    pub policy: F,
    pub value: F,
    pub entropy: F,
}

#[derive(Debug, Clone)]
pub struct PpoAgent<F> {
    pub nets: PpoNets<F>,
    cfg: AgentConfig<F>,
    action_dim: usize,
    actor_opt: Adam<F>,
    log_std_opt: Adam<F>,
    value_opt: Adam<F>,
    rollout: Rollout<F>,
    /// Pre-squash draw for the action most recently returned by
    /// [`Self::act`], consumed when the transition is recorded.
    pending_u: Option<Vec<F>>,
}

impl<F: Scalar> PpoAgent<F> {
    pub fn new(obs_dim: usize, action_dim: usize, cfg: AgentConfig<F>, rng: &mut impl Rng) -> Self {
        let nets = PpoNets::new(obs_dim, action_dim, &cfg.hidden_sizes, rng);
        let lr = cfg.learning_rate;
        Self {
            actor_opt: Adam::new(nets.actor.params().len(), lr),
            log_std_opt: Adam::new(action_dim, lr),
            value_opt: Adam::new(nets.value.params().len(), lr),
            nets,
            cfg,
            action_dim,
            rollout: Rollout::default(),
            pending_u: None,
        }
    }

    /// Stochastic action `tanh(mu + std * eps)` in `[-1, 1]^d`. The
    /// pre-squash draw is held for the next [`Self::record`] call.
    pub fn act(&mut self, obs: &[F], rng: &mut impl Rng) -> Result<Vec<F>, DrlError> {
        let mu = self.nets.actor.forward(obs)?;
        let eps = draw_noise::<F, _>(self.action_dim, rng);
        let u: Vec<F> = mu
            .iter()
            .zip(&eps)
            .zip(&self.nets.log_std)
            .map(|((&m, &e), &ls)| m + ls.exp() * e)
            .collect();
        let action = u.iter().map(|x| x.tanh()).collect();
        self.pending_u = Some(u);
        Ok(action)
    }

    pub fn act_mean(&self, obs: &[F]) -> Result<Vec<F>, DrlError> {
        Ok(self
            .nets
            .actor
            .forward(obs)?
            .iter()
            .map(|m| m.tanh())
            .collect())
    }

    /// Stores the transition behind the most recent [`Self::act`] call and
    /// runs an update once `n_steps` have accumulated. Returns the losses
    /// when an update fired.
    pub fn record(
        &mut self,
        obs: &[F],
        reward: F,
        next_obs: &[F],
        done: bool,
        rng: &mut impl Rng,
    ) -> Result<Option<PpoLosses<F>>, DrlError> {
        let u = self.pending_u.take().ok_or(DrlError::RolloutTooShort {
            have: self.rollout.len(),
        })?;
        self.rollout.obs.push(obs.to_vec());
        self.rollout.pre_actions.push(u);
        self.rollout.rewards.push(reward);
        self.rollout.dones.push(done);
        if self.rollout.len() < self.cfg.n_steps {
            return Ok(None);
        }
        let losses = self.update(next_obs, rng)?;
        self.rollout.clear();
        Ok(Some(losses))
    }

    fn update(&mut self, last_obs: &[F], rng: &mut impl Rng) -> Result<PpoLosses<F>, DrlError> {
        let t = self.rollout.len();
        if t == 0 {
            return Err(DrlError::RolloutTooShort { have: 0 });
        }

        let mut values = Vec::with_capacity(t);
        let mut logp_old = Vec::with_capacity(t);
        for i in 0..t {
            values.push(self.nets.value.forward(&self.rollout.obs[i])?[0]);
            let mu = self.nets.actor.forward(&self.rollout.obs[i])?;
            logp_old.push(diag_gaussian_log_prob(
                &mu,
                &self.nets.log_std,
                &self.rollout.pre_actions[i],
            ));
        }
        let last_value = self.nets.value.forward(last_obs)?[0];
        let (mut advantages, returns) = gae(
            &self.rollout.rewards,
            &values,
            &self.rollout.dones,
            last_value,
            self.cfg.gamma,
            self.cfg.gae_lambda,
        )?;
        normalize_advantages(&mut advantages);

        let mut indices: Vec<usize> = (0..t).collect();
        let mut last = PpoLosses {
            policy: F::zero(),
            value: F::zero(),
            entropy: diag_gaussian_entropy(&self.nets.log_std),
        };
        for _ in 0..self.cfg.n_epochs {
            indices.shuffle(rng);
            for chunk in indices.chunks(self.cfg.batch_size) {
                let obs: Vec<Vec<F>> = chunk.iter().map(|&i| self.rollout.obs[i].clone()).collect();
                let pre: Vec<Vec<F>> = chunk
                    .iter()
                    .map(|&i| self.rollout.pre_actions[i].clone())
                    .collect();
                let lp: Vec<F> = chunk.iter().map(|&i| logp_old[i]).collect();
                let adv: Vec<F> = chunk.iter().map(|&i| advantages[i]).collect();
                let ret: Vec<F> = chunk.iter().map(|&i| returns[i]).collect();

                let (pl, net_grads, ls_grads) = policy_loss_grads(
                    &self.nets.actor,
                    &self.nets.log_std,
                    &obs,
                    &pre,
                    &lp,
                    &adv,
                    self.cfg.clip_range,
                    self.cfg.ent_coef,
                )?;
                self.actor_opt.step(self.nets.actor.params_mut(), &net_grads);
                self.log_std_opt.step(&mut self.nets.log_std, &ls_grads);
                for ls in self.nets.log_std.iter_mut() {
                    *ls = clamp_log_std(*ls);
                }

                let (vl, v_grads) =
                    value_loss_grads(&self.nets.value, &obs, &ret, self.cfg.vf_coef)?;
                self.value_opt.step(self.nets.value.params_mut(), &v_grads);

                last.policy = pl;
                last.value = vl;
            }
        }
        last.entropy = diag_gaussian_entropy(&self.nets.log_std);
        Ok(last)
    }

    pub fn config(&self) -> &AgentConfig<F> {
        &self.cfg
    }

    pub fn rollout_len(&self) -> usize {
        self.rollout.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drl::Algorithm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const OBS: usize = 3;
    const ACT: usize = 2;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn toy_minibatch(
        n: usize,
        seed: u64,
    ) -> (DenseNet<f64>, Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
        let mut r = rng(seed);
        let actor = DenseNet::new(&[OBS, 8, ACT], &mut r);
        let log_std = vec![-0.3, 0.2];
        let obs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..OBS).map(|_| r.random_range(-1.0..1.0)).collect())
            .collect();
        let pre: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..ACT).map(|_| r.random_range(-1.5..1.5)).collect())
            .collect();
        let adv: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
        (actor, log_std, obs, pre, adv)
    }

    #[test]
    fn ratio_one_surrogate_equals_minus_mean_advantage() {
        let (actor, log_std, obs, pre, adv) = toy_minibatch(6, 1);
        // logp_old computed from the very same parameters: ratio is 1.
        let logp_old: Vec<f64> = obs
            .iter()
            .zip(&pre)
            .map(|(o, u)| {
                diag_gaussian_log_prob(&actor.forward(o).unwrap(), &log_std, u)
            })
            .collect();
        let (loss, _, _) = policy_loss_grads(
            &actor, &log_std, &obs, &pre, &logp_old, &adv, 0.2, 0.0,
        )
        .unwrap();
        let mean_adv = adv.iter().sum::<f64>() / adv.len() as f64;
        assert!((loss + mean_adv).abs() < 1e-12, "{loss} vs {}", -mean_adv);
    }

    #[test]
    fn policy_gradients_match_finite_differences() {
        let (mut actor, mut log_std, obs, pre, adv) = toy_minibatch(5, 2);
        // Stale log-probs so ratios differ from 1 and clipping can engage.
        let logp_old: Vec<f64> = obs
            .iter()
            .zip(&pre)
            .map(|(o, u)| {
                diag_gaussian_log_prob(&actor.forward(o).unwrap(), &log_std, u) + 0.05
            })
            .collect();
        let loss_at = |actor: &DenseNet<f64>, log_std: &[f64]| {
            policy_loss_grads(actor, log_std, &obs, &pre, &logp_old, &adv, 0.2, 0.01)
                .unwrap()
                .0
        };
        let (_, net_grads, ls_grads) = policy_loss_grads(
            &actor, &log_std, &obs, &pre, &logp_old, &adv, 0.2, 0.01,
        )
        .unwrap();

        let h = 1e-6;
        for k in (0..actor.params().len()).step_by(7) {
            let orig = actor.params()[k];
            actor.params_mut()[k] = orig + h;
            let up = loss_at(&actor, &log_std);
            actor.params_mut()[k] = orig - h;
            let down = loss_at(&actor, &log_std);
            actor.params_mut()[k] = orig;
            let fd = (up - down) / (2.0 * h);
            let rel = (net_grads[k] - fd).abs() / fd.abs().max(1e-6);
            assert!(rel < 1e-4, "param {k}: {} vs {fd}", net_grads[k]);
        }
        for k in 0..ACT {
            let orig = log_std[k];
            log_std[k] = orig + h;
            let up = loss_at(&actor, &log_std);
            log_std[k] = orig - h;
            let down = loss_at(&actor, &log_std);
            log_std[k] = orig;
            let fd = (up - down) / (2.0 * h);
            let rel = (ls_grads[k] - fd).abs() / fd.abs().max(1e-6);
            assert!(rel < 1e-4, "log_std {k}: {} vs {fd}", ls_grads[k]);
        }
    }

    #[test]
    fn value_gradients_match_finite_differences() {
        let mut r = rng(3);
        let mut value = DenseNet::<f64>::new(&[OBS, 8, 1], &mut r);
        let obs: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..OBS).map(|_| r.random_range(-1.0..1.0)).collect())
            .collect();
        let returns: Vec<f64> = (0..5).map(|_| r.random_range(-3.0..0.0)).collect();
        let (_, grads) = value_loss_grads(&value, &obs, &returns, 0.5).unwrap();
        let h = 1e-5;
        for k in (0..value.params().len()).step_by(7) {
            let orig = value.params()[k];
            value.params_mut()[k] = orig + h;
            let up = value_loss_grads(&value, &obs, &returns, 0.5).unwrap().0;
            value.params_mut()[k] = orig - h;
            let down = value_loss_grads(&value, &obs, &returns, 0.5).unwrap().0;
            value.params_mut()[k] = orig;
            let fd = (up - down) / (2.0 * h);
            let rel = (grads[k] - fd).abs() / fd.abs().max(1e-6);
            assert!(rel < 1e-4, "param {k}: {} vs {fd}", grads[k]);
        }
    }

    #[test]
    fn normalized_advantages_have_zero_mean_unit_std() {
        let mut adv: Vec<f64> = (0..64).map(|i| (i as f64) * 0.37 - 5.0).collect();
        normalize_advantages(&mut adv);
        let mean = adv.iter().sum::<f64>() / adv.len() as f64;
        let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / adv.len() as f64;
        assert!(mean.abs() < 1e-10);
        assert!((var.sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn update_fires_exactly_at_n_steps() {
        let cfg = AgentConfig {
            n_steps: 8,
            batch_size: 4,
            n_epochs: 2,
            hidden_sizes: vec![8],
            ..AgentConfig::defaults(Algorithm::Ppo)
        };
        let mut agent = PpoAgent::new(OBS, ACT, cfg, &mut rng(4));
        let mut r = rng(5);
        let obs = vec![0.1, 0.2, 0.3];
        for step in 0..16 {
            let _a = agent.act(&obs, &mut r).unwrap();
            let out = agent
                .record(&obs, -1.0, &obs, false, &mut r)
                .unwrap();
            if step % 8 == 7 {
                assert!(out.is_some(), "update expected at step {step}");
                assert_eq!(agent.rollout_len(), 0);
            } else {
                assert!(out.is_none());
            }
        }
    }

    #[test]
    fn recording_without_acting_is_an_error() {
        let cfg = AgentConfig {
            hidden_sizes: vec![8],
            ..AgentConfig::defaults(Algorithm::Ppo)
        };
        let mut agent = PpoAgent::new(OBS, ACT, cfg, &mut rng(6));
        let obs = vec![0.0; OBS];
        assert!(agent.record(&obs, 0.0, &obs, false, &mut rng(7)).is_err());
    }

    #[test]
    fn training_is_seed_deterministic() {
        let run = || {
            let cfg: AgentConfig<f64> = AgentConfig {
                n_steps: 16,
                batch_size: 8,
                n_epochs: 3,
                hidden_sizes: vec![8],
                ..AgentConfig::defaults(Algorithm::Ppo)
            };
            let mut agent = PpoAgent::new(OBS, ACT, cfg, &mut rng(8));
            let mut r = rng(9);
            let mut obs = vec![0.5, -0.5, 0.0];
            for _ in 0..32 {
                let a = agent.act(&obs, &mut r).unwrap();
                let reward = -(a[0] - 0.3).powi(2);
                agent.record(&obs.clone(), reward, &obs, false, &mut r).unwrap();
                obs[2] = a[1];
            }
            agent.nets.actor.params().to_vec()
        };
        assert_eq!(run(), run());
    }
}

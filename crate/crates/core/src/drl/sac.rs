//! Soft actor-critic for continuous actions: twin soft Q critics with
//! polyak-averaged targets, a tanh-squashed Gaussian actor trained by the
//! reparameterization trick, and automatic entropy-coefficient tuning.
//!
//! The loss functions take the Gaussian noise draws as explicit arguments,
//! which makes every analytic gradient checkable against finite differences
//! with the randomness held fixed.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;

use super::adam::Adam;
use super::buffer::Batch;
use super::gaussian::{squash_grads, squash_sample};
use super::net::{polyak_update, DenseNet};
use super::{AgentConfig, DrlError};

/// All learnable state of a SAC agent.
#[derive(Debug, Clone)]
pub struct SacNets<F> {
    /// Policy head: obs -> [mu; log_std], both of action dimension.
    pub actor: DenseNet<F>,
    /// Soft Q functions over concatenated (obs, action).
    pub critic1: DenseNet<F>,
    pub critic2: DenseNet<F>,
    pub target1: DenseNet<F>,
    pub target2: DenseNet<F>,
    /// Log of the entropy coefficient alpha.
    pub log_alpha: F,
}

impl<F: Scalar> SacNets<F> {
    pub fn new(
        obs_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        initial_alpha: F,
        rng: &mut impl Rng,
    ) -> Self {
        let actor_sizes = net_sizes(obs_dim, hidden, 2 * action_dim);
        let critic_sizes = net_sizes(obs_dim + action_dim, hidden, 1);
        let actor = DenseNet::new(&actor_sizes, rng);
        let critic1 = DenseNet::new(&critic_sizes, rng);
        let critic2 = DenseNet::new(&critic_sizes, rng);
        Self {
            actor,
            target1: critic1.clone(),
            target2: critic2.clone(),
            critic1,
            critic2,
            log_alpha: initial_alpha.ln(),
        }
    }

    pub fn alpha(&self) -> F {
        self.log_alpha.exp()
    }
}

pub fn net_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(input);
    sizes.extend_from_slice(hidden);
    sizes.push(output);
    sizes
}

/// Critic input layout: observation slots first, then action slots.
pub fn concat_obs_action<F: Scalar>(obs: &[F], action: &[F]) -> Vec<F> {
    let mut joined = Vec::with_capacity(obs.len() + action.len());
    joined.extend_from_slice(obs);
    joined.extend_from_slice(action);
    joined
}

/// Splits an actor head output into its mean and log-std halves.
pub fn split_head<F>(out: &[F], action_dim: usize) -> (&[F], &[F]) {
    debug_assert_eq!(out.len(), 2 * action_dim);
    out.split_at(action_dim)
}

/// Soft Bellman regression targets: `y = r + gamma * (1 - done) *
/// (min(Q1', Q2')(s', a') - alpha * log pi(a' | s'))` with `a'` drawn from
/// the current actor at `s'` using the provided noise rows.
pub fn critic_targets<F: Scalar>(
    nets: &SacNets<F>,
    batch: &Batch<F>,
    next_noise: &[Vec<F>],
    gamma: F,
) -> Result<Vec<F>, DrlError> {
    let action_dim = next_noise.first().map_or(0, Vec::len);
    let alpha = nets.alpha();
    let mut targets = Vec::with_capacity(batch.len());
    for i in 0..batch.len() {
        let head = nets.actor.forward(&batch.next_obs[i])?;
        let (mu, log_std) = split_head(&head, action_dim);
        let sample = squash_sample(mu, log_std, &next_noise[i]);
        let joined = concat_obs_action(&batch.next_obs[i], &sample.a);
        let q1 = nets.target1.forward(&joined)?[0];
        let q2 = nets.target2.forward(&joined)?[0];
        let not_done = if batch.dones[i] { F::zero() } else { F::one() };
        targets.push(
            batch.rewards[i] + gamma * not_done * (q1.min(q2) - alpha * sample.log_prob),
        );
    }
    Ok(targets)
}

/// Mean squared Bellman error of one critic against fixed targets, plus its
/// parameter gradient.
pub fn critic_loss_grads<F: Scalar>(
    critic: &DenseNet<F>,
    batch: &Batch<F>,
    targets: &[F],
) -> Result<(F, Vec<F>), DrlError> {
    let n = F::of(batch.len() as f64);
    let mut loss = F::zero();
    let mut grads = vec![F::zero(); critic.params().len()];
    for i in 0..batch.len() {
        let joined = concat_obs_action(&batch.obs[i], &batch.actions[i]);
        let cache = critic.forward_cached(&joined)?;
        let err = cache.output()[0] - targets[i];
        loss += err * err / n;
        let (pg, _) = critic.backward(&cache, &[F::of(2.0) * err / n])?;
        for (g, p) in grads.iter_mut().zip(pg) {
            *g += p;
        }
    }
    Ok((loss, grads))
}

/// Reparameterized policy objective `mean(alpha * log pi(a|s) - min Q(s, a))`
/// with `a = tanh(mu + std * eps)`. Returns the loss, the gradient with
/// respect to the actor parameters, and the mean log-probability (used by
/// the entropy-coefficient update). Critics and alpha are held constant.
pub fn actor_loss_grads<F: Scalar>(
    nets: &SacNets<F>,
    batch: &Batch<F>,
    noise: &[Vec<F>],
) -> Result<(F, Vec<F>, F), DrlError> {
    let action_dim = noise.first().map_or(0, Vec::len);
    let alpha = nets.alpha();
    let n = F::of(batch.len() as f64);
    let mut loss = F::zero();
    let mut mean_log_prob = F::zero();
    let mut grads = vec![F::zero(); nets.actor.params().len()];

    for i in 0..batch.len() {
        let cache = nets.actor.forward_cached(&batch.obs[i])?;
        let (mu, log_std) = split_head(cache.output(), action_dim);
        let sample = squash_sample(mu, log_std, &noise[i]);
        let g = squash_grads(log_std, &noise[i], &sample);

        let joined = concat_obs_action(&batch.obs[i], &sample.a);
        let c1 = nets.critic1.forward_cached(&joined)?;
        let c2 = nets.critic2.forward_cached(&joined)?;
        let (q1, q2) = (c1.output()[0], c2.output()[0]);
        let (q_min, min_cache, min_critic) = if q1 <= q2 {
            (q1, c1, &nets.critic1)
        } else {
            (q2, c2, &nets.critic2)
        };

        loss += (alpha * sample.log_prob - q_min) / n;
        mean_log_prob += sample.log_prob / n;

        // dQ/da via the chosen critic's input gradient, action slots only.
        let (_, input_grad) = min_critic.backward(&min_cache, &[F::one()])?;
        let dq_da = &input_grad[batch.obs[i].len()..];

        // Chain onto the actor head: [d/d mu; d/d log_std].
        let mut head_grad = vec![F::zero(); 2 * action_dim];
        for k in 0..action_dim {
            head_grad[k] = (alpha * g.dlogp_dmu[k] - dq_da[k] * g.da_dmu[k]) / n;
            head_grad[action_dim + k] =
                (alpha * g.dlogp_dlog_std[k] - dq_da[k] * g.da_dlog_std[k]) / n;
        }
        let (pg, _) = nets.actor.backward(&cache, &head_grad)?;
        for (acc, p) in grads.iter_mut().zip(pg) {
            *acc += p;
        }
    }
    Ok((loss, grads, mean_log_prob))
}

/// Entropy coefficient objective `-log_alpha * mean(log pi + target_entropy)`
/// and its derivative with respect to `log_alpha`.
pub fn alpha_loss_grad<F: Scalar>(log_alpha: F, mean_log_prob: F, target_entropy: F) -> (F, F) {
    let drift = mean_log_prob + target_entropy;
    (-log_alpha * drift, -drift)
}

#[derive(Debug, Clone, Copy)]
pub struct SacLosses<F> {
    pub critic1: F,
    pub critic2: F,
    pub actor: F,
    pub alpha_loss: F,
    pub alpha: F,
    pub mean_log_prob: F,
}

/// One complete learner: networks, optimizers, and the update rule.
#[derive(Debug, Clone)]
pub struct SacAgent<F> {
    pub nets: SacNets<F>,
    cfg: AgentConfig<F>,
    action_dim: usize,
    target_entropy: F,
    actor_opt: Adam<F>,
    critic1_opt: Adam<F>,
    critic2_opt: Adam<F>,
    alpha_opt: Adam<F>,
}

impl<F: Scalar> SacAgent<F> {
    pub fn new(obs_dim: usize, action_dim: usize, cfg: AgentConfig<F>, rng: &mut impl Rng) -> Self {
        let nets = SacNets::new(
            obs_dim,
            action_dim,
            &cfg.hidden_sizes,
            cfg.initial_alpha,
            rng,
        );
        let lr = cfg.learning_rate;
        Self {
            action_dim,
            target_entropy: -F::of(action_dim as f64),
            actor_opt: Adam::new(nets.actor.params().len(), lr),
            critic1_opt: Adam::new(nets.critic1.params().len(), lr),
            critic2_opt: Adam::new(nets.critic2.params().len(), lr),
            alpha_opt: Adam::new(1, lr),
            nets,
            cfg,
        }
    }

    /// Stochastic action in `[-1, 1]^d`, drawing the Gaussian noise from
    /// `rng`.
    pub fn act(&self, obs: &[F], rng: &mut impl Rng) -> Result<Vec<F>, DrlError> {
        let head = self.nets.actor.forward(obs)?;
        let (mu, log_std) = split_head(&head, self.action_dim);
        let eps = draw_noise(self.action_dim, rng);
        Ok(squash_sample(mu, log_std, &eps).a)
    }

    /// Mean action `tanh(mu)`.
    pub fn act_mean(&self, obs: &[F]) -> Result<Vec<F>, DrlError> {
        let head = self.nets.actor.forward(obs)?;
        Ok(head[..self.action_dim].iter().map(|m| m.tanh()).collect())
    }

    /// One gradient update on a sampled batch: both critics, the actor, the
    /// entropy coefficient, then polyak target tracking.
    pub fn update(&mut self, batch: &Batch<F>, rng: &mut impl Rng) -> Result<SacLosses<F>, DrlError> {
        let next_noise = draw_noise_rows(batch.len(), self.action_dim, rng);
        let cur_noise = draw_noise_rows(batch.len(), self.action_dim, rng);

        let targets = critic_targets(&self.nets, batch, &next_noise, self.cfg.gamma)?;
        let (l1, g1) = critic_loss_grads(&self.nets.critic1, batch, &targets)?;
        let (l2, g2) = critic_loss_grads(&self.nets.critic2, batch, &targets)?;
        self.critic1_opt.step(self.nets.critic1.params_mut(), &g1);
        self.critic2_opt.step(self.nets.critic2.params_mut(), &g2);

        let (actor_loss, actor_grads, mean_log_prob) =
            actor_loss_grads(&self.nets, batch, &cur_noise)?;
        self.actor_opt.step(self.nets.actor.params_mut(), &actor_grads);

        let (alpha_loss, alpha_grad) =
            alpha_loss_grad(self.nets.log_alpha, mean_log_prob, self.target_entropy);
        let mut log_alpha = [self.nets.log_alpha];
        self.alpha_opt.step(&mut log_alpha, &[alpha_grad]);
        self.nets.log_alpha = log_alpha[0];

        polyak_update(&mut self.nets.target1, &self.nets.critic1, self.cfg.tau);
        polyak_update(&mut self.nets.target2, &self.nets.critic2, self.cfg.tau);

        Ok(SacLosses {
            critic1: l1,
            critic2: l2,
            actor: actor_loss,
            alpha_loss,
            alpha: self.nets.alpha(),
            mean_log_prob,
        })
    }

    pub fn config(&self) -> &AgentConfig<F> {
        &self.cfg
    }
}

pub fn draw_noise<F: Scalar, R: Rng>(dim: usize, rng: &mut R) -> Vec<F> {
    (0..dim)
        .map(|_| F::of(rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

pub fn draw_noise_rows<F: Scalar, R: Rng>(rows: usize, dim: usize, rng: &mut R) -> Vec<Vec<F>> {
    (0..rows).map(|_| draw_noise(dim, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const OBS: usize = 4;
    const ACT: usize = 2;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn toy_nets(seed: u64) -> SacNets<f64> {
        SacNets::new(OBS, ACT, &[8, 8], 1.0, &mut rng(seed))
    }

    fn toy_batch(n: usize, seed: u64) -> (Batch<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut r = rng(seed);
        let mut batch = Batch {
            obs: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_obs: Vec::new(),
            dones: Vec::new(),
        };
        for i in 0..n {
            batch.obs.push((0..OBS).map(|_| r.random_range(-1.0..1.0)).collect());
            batch
                .actions
                .push((0..ACT).map(|_| r.random_range(-0.9..0.9)).collect());
            batch.rewards.push(r.random_range(-2.0..0.0));
            batch
                .next_obs
                .push((0..OBS).map(|_| r.random_range(-1.0..1.0)).collect());
            batch.dones.push(i % 5 == 0);
        }
        let next_noise = draw_noise_rows(n, ACT, &mut r);
        let cur_noise = draw_noise_rows(n, ACT, &mut r);
        (batch, next_noise, cur_noise)
    }

    #[test]
    fn targets_use_the_smaller_target_critic() {
        let mut nets = toy_nets(1);
        let (batch, noise, _) = toy_batch(6, 2);
        // Push target2 far below target1 by biasing its output unit.
        let n = nets.target2.params().len();
        nets.target2.params_mut()[n - 1] = -100.0;
        let targets = critic_targets(&nets, &batch, &noise, 0.9).unwrap();
        for (i, t) in targets.iter().enumerate() {
            if !batch.dones[i] {
                assert!(*t < -50.0, "target {t} should reflect the -100 critic");
            } else {
                assert!((*t - batch.rewards[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn done_transitions_regress_to_raw_reward() {
        let nets = toy_nets(3);
        let (mut batch, noise, _) = toy_batch(4, 4);
        batch.dones = vec![true; 4];
        let targets = critic_targets(&nets, &batch, &noise, 0.99).unwrap();
        assert_eq!(targets, batch.rewards);
    }

    #[test]
    fn critic_gradient_matches_finite_differences() {
        let nets = toy_nets(5);
        let (batch, noise, _) = toy_batch(5, 6);
        let targets = critic_targets(&nets, &batch, &noise, 0.9).unwrap();
        let mut critic = nets.critic1.clone();
        let (_, grads) = critic_loss_grads(&critic, &batch, &targets).unwrap();

        let h = 1e-5;
        for k in (0..critic.params().len()).step_by(13) {
            let orig = critic.params()[k];
            critic.params_mut()[k] = orig + h;
            let up = critic_loss_grads(&critic, &batch, &targets).unwrap().0;
            critic.params_mut()[k] = orig - h;
            let down = critic_loss_grads(&critic, &batch, &targets).unwrap().0;
            critic.params_mut()[k] = orig;
            let fd = (up - down) / (2.0 * h);
            let rel = (grads[k] - fd).abs() / fd.abs().max(1e-6);
            assert!(rel < 1e-4, "param {k}: {} vs {fd}", grads[k]);
        }
    }

    #[test]
    fn actor_gradient_matches_finite_differences() {
        let mut nets = toy_nets(7);
        let (batch, _, noise) = toy_batch(5, 8);
        let (_, grads, _) = actor_loss_grads(&nets, &batch, &noise).unwrap();

        let h = 1e-5;
        for k in (0..nets.actor.params().len()).step_by(11) {
            let orig = nets.actor.params()[k];
            nets.actor.params_mut()[k] = orig + h;
            let up = actor_loss_grads(&nets, &batch, &noise).unwrap().0;
            nets.actor.params_mut()[k] = orig - h;
            let down = actor_loss_grads(&nets, &batch, &noise).unwrap().0;
            nets.actor.params_mut()[k] = orig;
            let fd = (up - down) / (2.0 * h);
            let rel = (grads[k] - fd).abs() / fd.abs().max(1e-6);
            assert!(rel < 1e-4, "param {k}: {} vs {fd}", grads[k]);
        }
    }

    #[test]
    fn alpha_gradient_matches_finite_differences() {
        let (loss, grad) = alpha_loss_grad(0.3_f64, -1.7, -2.0);
        assert!((loss - (-0.3 * (-1.7 - 2.0))).abs() < 1e-12);
        let h = 1e-6;
        let up = alpha_loss_grad(0.3 + h, -1.7, -2.0).0;
        let down = alpha_loss_grad(0.3 - h, -1.7, -2.0).0;
        assert!((grad - (up - down) / (2.0 * h)).abs() < 1e-8);
    }

    #[test]
    fn update_runs_and_polyak_matches_closed_form() {
        let mut agent = SacAgent::new(OBS, ACT, AgentConfig::defaults(super::super::Algorithm::Sac), &mut rng(9));
        let (batch, _, _) = toy_batch(8, 10);
        let before_t1 = agent.nets.target1.clone();
        let mut r = rng(11);
        let losses = agent.update(&batch, &mut r).unwrap();
        assert!(losses.critic1.is_finite());
        assert!(losses.critic2.is_finite());
        assert!(losses.actor.is_finite());
        assert!(losses.alpha_loss.is_finite());

        // target = 0.995 * old + 0.005 * online, exactly.
        for ((t, old), online) in agent
            .nets
            .target1
            .params()
            .iter()
            .zip(before_t1.params())
            .zip(agent.nets.critic1.params())
        {
            let expect = 0.995 * old + 0.005 * online;
            assert!((t - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn updates_are_seed_deterministic() {
        let run = || {
            let mut agent = SacAgent::new(
                OBS,
                ACT,
                AgentConfig::defaults(super::super::Algorithm::Sac),
                &mut rng(20),
            );
            let (batch, _, _) = toy_batch(8, 21);
            let mut r = rng(22);
            for _ in 0..3 {
                agent.update(&batch, &mut r).unwrap();
            }
            agent.nets.actor.params().to_vec()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn mean_action_is_tanh_of_head_mean() {
        let agent: SacAgent<f64> = SacAgent::new(
            OBS,
            ACT,
            AgentConfig::defaults(super::super::Algorithm::Sac),
            &mut rng(30),
        );
        let obs = vec![0.1, -0.4, 0.7, 0.0];
        let head = agent.nets.actor.forward(&obs).unwrap();
        let a = agent.act_mean(&obs).unwrap();
        for k in 0..ACT {
            assert!((a[k] - head[k].tanh()).abs() < 1e-15);
            assert!(a[k].abs() <= 1.0);
        }
    }
}

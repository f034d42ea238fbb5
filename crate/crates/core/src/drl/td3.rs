//! Twin delayed deep deterministic policy gradient: clipped double-Q
//! critics, smoothed target-policy actions, and an actor updated once every
//! `policy_delay` critic steps. The actor network emits a pre-squash value;
//! `tanh` keeps actions inside `[-1, 1]`.

use rand::Rng;

use crate::scalar::Scalar;

use super::adam::Adam;
use super::buffer::Batch;
use super::net::{polyak_update, DenseNet};
use super::sac::{concat_obs_action, critic_loss_grads, draw_noise_rows, net_sizes};
use super::{AgentConfig, DrlError};

#[derive(Debug, Clone)]
pub struct Td3Nets<F> {
    /// Deterministic policy: obs -> pre-tanh action.
    pub actor: DenseNet<F>,
    pub critic1: DenseNet<F>,
    pub critic2: DenseNet<F>,
    pub actor_target: DenseNet<F>,
    pub target1: DenseNet<F>,
    pub target2: DenseNet<F>,
}

impl<F: Scalar> Td3Nets<F> {
    pub fn new(obs_dim: usize, action_dim: usize, hidden: &[usize], rng: &mut impl Rng) -> Self {
        let actor = DenseNet::new(&net_sizes(obs_dim, hidden, action_dim), rng);
        let critic_sizes = net_sizes(obs_dim + action_dim, hidden, 1);
        let critic1 = DenseNet::new(&critic_sizes, rng);
        let critic2 = DenseNet::new(&critic_sizes, rng);
        Self {
            actor_target: actor.clone(),
            target1: critic1.clone(),
            target2: critic2.clone(),
            actor,
            critic1,
            critic2,
        }
    }
}

fn squash<F: Scalar>(pre: &[F]) -> Vec<F> {
    pre.iter().map(|p| p.tanh()).collect()
}

/// Clipped double-Q regression targets with target-policy smoothing:
/// the target action is `clamp(tanh(actor_target(s')) + clamp(sigma * eps,
/// +/-clip), -1, 1)` and the bootstrap uses the smaller target critic.
pub fn critic_targets<F: Scalar>(
    nets: &Td3Nets<F>,
    batch: &Batch<F>,
    smoothing_noise: &[Vec<F>],
    cfg: &AgentConfig<F>,
) -> Result<Vec<F>, DrlError> {
    let mut targets = Vec::with_capacity(batch.len());
    for i in 0..batch.len() {
        let pre = nets.actor_target.forward(&batch.next_obs[i])?;
        let mut action = squash(&pre);
        for (a, &eps) in action.iter_mut().zip(&smoothing_noise[i]) {
            let noise = (cfg.target_noise * eps)
                .max(-cfg.target_noise_clip)
                .min(cfg.target_noise_clip);
            *a = (*a + noise).max(-F::one()).min(F::one());
        }
        let joined = concat_obs_action(&batch.next_obs[i], &action);
        let q1 = nets.target1.forward(&joined)?[0];
        let q2 = nets.target2.forward(&joined)?[0];
        let not_done = if batch.dones[i] { F::zero() } else { F::one() };
        targets.push(batch.rewards[i] + cfg.gamma * not_done * q1.min(q2));
    }
    Ok(targets)
}

/// Deterministic policy gradient objective `-mean(Q1(s, tanh(actor(s))))`
/// and its gradient with respect to the actor parameters.
pub fn actor_loss_grads<F: Scalar>(
    nets: &Td3Nets<F>,
    batch: &Batch<F>,
) -> Result<(F, Vec<F>), DrlError> {
    let n = F::of(batch.len() as f64);
    let mut loss = F::zero();
    let mut grads = vec![F::zero(); nets.actor.params().len()];
    for i in 0..batch.len() {
        let cache = nets.actor.forward_cached(&batch.obs[i])?;
        let action = squash(cache.output());
        let joined = concat_obs_action(&batch.obs[i], &action);
        let q_cache = nets.critic1.forward_cached(&joined)?;
        loss -= q_cache.output()[0] / n;

        let (_, input_grad) = nets.critic1.backward(&q_cache, &[-F::one() / n])?;
        let dq_da = &input_grad[batch.obs[i].len()..];
        let pre_grad: Vec<F> = dq_da
            .iter()
            .zip(&action)
            .map(|(&g, &a)| g * (F::one() - a * a))
            .collect();
        let (pg, _) = nets.actor.backward(&cache, &pre_grad)?;
        for (acc, p) in grads.iter_mut().zip(pg) {
            *acc += p;
        }
    }
    Ok((loss, grads))
}

#[derive(Debug, Clone, Copy)]
pub struct Td3Losses<F> {
    pub critic1: F,
    pub critic2: F,
    /// Present only on steps where the delayed actor update ran.
    pub actor: Option<F>,
}

#[derive(Debug, Clone)]
pub struct Td3Agent<F> {
    pub nets: Td3Nets<F>,
    cfg: AgentConfig<F>,
    action_dim: usize,
    actor_opt: Adam<F>,
    critic1_opt: Adam<F>,
    critic2_opt: Adam<F>,
    updates_done: u64,
}

impl<F: Scalar> Td3Agent<F> {
    pub fn new(obs_dim: usize, action_dim: usize, cfg: AgentConfig<F>, rng: &mut impl Rng) -> Self {
        let nets = Td3Nets::new(obs_dim, action_dim, &cfg.hidden_sizes, rng);
        let lr = cfg.learning_rate;
        Self {
            actor_opt: Adam::new(nets.actor.params().len(), lr),
            critic1_opt: Adam::new(nets.critic1.params().len(), lr),
            critic2_opt: Adam::new(nets.critic2.params().len(), lr),
            nets,
            cfg,
            action_dim,
            updates_done: 0,
        }
    }

    /// Exploration action: mean action plus clamped Gaussian noise.
    pub fn act(&self, obs: &[F], rng: &mut impl Rng) -> Result<Vec<F>, DrlError> {
        let mut action = self.act_mean(obs)?;
        let eps = super::sac::draw_noise::<F, _>(self.action_dim, rng);
        for (a, e) in action.iter_mut().zip(eps) {
            *a = (*a + self.cfg.exploration_noise * e)
                .max(-F::one())
                .min(F::one());
        }
        Ok(action)
    }

    pub fn act_mean(&self, obs: &[F]) -> Result<Vec<F>, DrlError> {
        Ok(squash(&self.nets.actor.forward(obs)?))
    }

    /// One update step: critics always, actor and targets every
    /// `policy_delay` calls.
    pub fn update(&mut self, batch: &Batch<F>, rng: &mut impl Rng) -> Result<Td3Losses<F>, DrlError> {
        let noise = draw_noise_rows(batch.len(), self.action_dim, rng);
        let targets = critic_targets(&self.nets, batch, &noise, &self.cfg)?;
        let (l1, g1) = critic_loss_grads(&self.nets.critic1, batch, &targets)?;
        let (l2, g2) = critic_loss_grads(&self.nets.critic2, batch, &targets)?;
        self.critic1_opt.step(self.nets.critic1.params_mut(), &g1);
        self.critic2_opt.step(self.nets.critic2.params_mut(), &g2);
        self.updates_done += 1;

        let mut actor_loss = None;
        if self.updates_done % self.cfg.policy_delay as u64 == 0 {
            let (loss, grads) = actor_loss_grads(&self.nets, batch)?;
            self.actor_opt.step(self.nets.actor.params_mut(), &grads);
            actor_loss = Some(loss);
            polyak_update(&mut self.nets.actor_target, &self.nets.actor, self.cfg.tau);
            polyak_update(&mut self.nets.target1, &self.nets.critic1, self.cfg.tau);
            polyak_update(&mut self.nets.target2, &self.nets.critic2, self.cfg.tau);
        }

        Ok(Td3Losses {
            critic1: l1,
            critic2: l2,
            actor: actor_loss,
        })
    }

    pub fn config(&self) -> &AgentConfig<F> {
        &self.cfg
    }
}

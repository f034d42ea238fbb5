//! One front door for the three learners: a unified [`Agent`] that owns the
//! algorithm state, replay memory, and seeded randomness, plus the
//! serializable [`TrainedPolicy`] checkpoint used for evaluation-only runs.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::buffer::{ReplayBuffer, Transition};
use super::gaussian::squash_sample;
use super::net::DenseNet;
use super::ppo::PpoAgent;
use super::sac::{draw_noise, split_head, SacAgent};
use super::td3::Td3Agent;
use super::{AgentConfig, Algorithm, DrlError};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

enum Learner<F> {
    Sac(SacAgent<F>),
    Td3(Td3Agent<F>),
    Ppo(PpoAgent<F>),
}

/// A training agent: policy, critics, optimizers, experience memory, and a
/// seeded generator. All stochasticity (weight init, action noise, batch
/// sampling, minibatch shuffling) flows from `config.seed`.
pub struct Agent<F> {
    learner: Learner<F>,
    buffer: ReplayBuffer<F>,
    rng: ChaCha8Rng,
    obs_dim: usize,
    action_dim: usize,
    env_steps: u64,
    gradient_updates: u64,
}

impl<F: Scalar> Agent<F> {
    pub fn new(obs_dim: usize, action_dim: usize, cfg: AgentConfig<F>) -> Result<Self, DrlError> {
        cfg.validate()?;
        if obs_dim == 0 || action_dim == 0 {
            return Err(DrlError::InvalidConfig(
                "observation and action dimensions must be positive".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let buffer_capacity = match cfg.algorithm {
            Algorithm::Ppo => 1, // unused; rollouts live inside the learner
            _ => cfg.buffer_size,
        };
        let learner = match cfg.algorithm {
            Algorithm::Sac => Learner::Sac(SacAgent::new(obs_dim, action_dim, cfg, &mut rng)),
            Algorithm::Td3 => Learner::Td3(Td3Agent::new(obs_dim, action_dim, cfg, &mut rng)),
            Algorithm::Ppo => Learner::Ppo(PpoAgent::new(obs_dim, action_dim, cfg, &mut rng)),
        };
        Ok(Self {
            learner,
            buffer: ReplayBuffer::new(buffer_capacity),
            rng,
            obs_dim,
            action_dim,
            env_steps: 0,
            gradient_updates: 0,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.config().algorithm
    }

    pub fn config(&self) -> &AgentConfig<F> {
        match &self.learner {
            Learner::Sac(a) => a.config(),
            Learner::Td3(a) => a.config(),
            Learner::Ppo(a) => a.config(),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn gradient_updates(&self) -> u64 {
        self.gradient_updates
    }

    /// Exploration action in `[-1, 1]^d` drawn from the agent's generator.
    pub fn act_stochastic(&mut self, obs: &[F]) -> Result<Vec<F>, DrlError> {
        self.check_obs(obs)?;
        match &mut self.learner {
            Learner::Sac(a) => a.act(obs, &mut self.rng),
            Learner::Td3(a) => a.act(obs, &mut self.rng),
            Learner::Ppo(a) => a.act(obs, &mut self.rng),
        }
    }

    /// Mean/greedy action in `[-1, 1]^d`; same obs always maps to the same
    /// action.
    pub fn act_deterministic(&self, obs: &[F]) -> Result<Vec<F>, DrlError> {
        self.check_obs(obs)?;
        match &self.learner {
            Learner::Sac(a) => a.act_mean(obs),
            Learner::Td3(a) => a.act_mean(obs),
            Learner::Ppo(a) => a.act_mean(obs),
        }
    }

    /// Feeds one environment transition and runs whatever updates the
    /// algorithm's schedule calls for. Returns the number of gradient
    /// updates performed (0 or 1).
    pub fn record(
        &mut self,
        obs: &[F],
        action: &[F],
        reward: F,
        next_obs: &[F],
        done: bool,
    ) -> Result<usize, DrlError> {
        self.check_obs(obs)?;
        self.check_obs(next_obs)?;
        self.env_steps += 1;
        let updated = if let Learner::Ppo(a) = &mut self.learner {
            a.record(obs, reward, next_obs, done, &mut self.rng)?.is_some()
        } else {
            if action.len() != self.action_dim {
                return Err(DrlError::ShapeMismatch {
                    expected: self.action_dim,
                    got: action.len(),
                });
            }
            self.buffer.push(Transition {
                obs: obs.to_vec(),
                action: action.to_vec(),
                reward,
                next_obs: next_obs.to_vec(),
                done,
            });
            let cfg = self.config();
            let (batch_size, starts, freq) =
                (cfg.batch_size, cfg.learning_starts as u64, cfg.train_freq as u64);
            let ready = self.buffer.len() >= batch_size
                && self.env_steps >= starts
                && self.env_steps % freq == 0;
            if ready {
                let batch = self.buffer.sample(batch_size, &mut self.rng)?;
                match &mut self.learner {
                    Learner::Sac(a) => {
                        a.update(&batch, &mut self.rng)?;
                    }
                    Learner::Td3(a) => {
                        a.update(&batch, &mut self.rng)?;
                    }
                    Learner::Ppo(_) => unreachable!(),
                }
                true
            } else {
                false
            }
        };
        if updated {
            self.gradient_updates += 1;
        }
        Ok(updated as usize)
    }

    /// Number of stored transitions (replay fill, or current rollout length
    /// for the on-policy learner).
    pub fn buffered(&self) -> usize {
        match &self.learner {
            Learner::Ppo(a) => a.rollout_len(),
            _ => self.buffer.len(),
        }
    }

    /// Drops all stored experience but keeps network weights and optimizer
    /// state (used when a curriculum phase should not replay old climates).
    pub fn clear_experience(&mut self) {
        self.buffer.clear();
    }

    /// Snapshot of the current policy for checkpointing or evaluation.
    pub fn policy(&self) -> TrainedPolicy<F> {
        let (actor, ppo_log_std) = match &self.learner {
            Learner::Sac(a) => (a.nets.actor.clone(), None),
            Learner::Td3(a) => (a.nets.actor.clone(), None),
            Learner::Ppo(a) => (a.nets.actor.clone(), Some(a.nets.log_std.clone())),
        };
        TrainedPolicy {
            format_version: CHECKPOINT_FORMAT_VERSION,
            algorithm: self.algorithm(),
            obs_dim: self.obs_dim,
            action_dim: self.action_dim,
            actor,
            ppo_log_std,
            normalization_bounds: None,
            agent_config: self.config().clone(),
        }
    }

    fn check_obs(&self, obs: &[F]) -> Result<(), DrlError> {
        if obs.len() != self.obs_dim {
            return Err(DrlError::ShapeMismatch {
                expected: self.obs_dim,
                got: obs.len(),
            });
        }
        Ok(())
    }
}

/// Serializable policy checkpoint: enough to reproduce actions exactly
/// (actor weights, exploration parameters via the embedded config) and to
/// normalize raw observations (the bounds the training run ended with).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Scalar"))]
pub struct TrainedPolicy<F> {
    pub format_version: u32,
    pub algorithm: Algorithm,
    pub obs_dim: usize,
    pub action_dim: usize,
    pub actor: DenseNet<F>,
    /// State-independent log stds (on-policy checkpoints only).
    pub ppo_log_std: Option<Vec<F>>,
    /// Observation normalization (mins, maxs) captured at save time.
    pub normalization_bounds: Option<(Vec<F>, Vec<F>)>,
    pub agent_config: AgentConfig<F>,
}

impl<F: Scalar> TrainedPolicy<F> {
    pub fn with_normalization_bounds(mut self, mins: Vec<F>, maxs: Vec<F>) -> Self {
        self.normalization_bounds = Some((mins, maxs));
        self
    }

    /// Structural checks run after deserialization.
    pub fn validate(&self) -> Result<(), DrlError> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(DrlError::Checkpoint(format!(
                "unsupported checkpoint format_version {} (this build reads {})",
                self.format_version, CHECKPOINT_FORMAT_VERSION
            )));
        }
        if self.actor.input_size() != self.obs_dim {
            return Err(DrlError::Checkpoint(format!(
                "actor expects {} inputs but obs_dim is {}",
                self.actor.input_size(),
                self.obs_dim
            )));
        }
        let head = match self.algorithm {
            Algorithm::Sac => 2 * self.action_dim,
            Algorithm::Td3 | Algorithm::Ppo => self.action_dim,
        };
        if self.actor.output_size() != head {
            return Err(DrlError::Checkpoint(format!(
                "actor emits {} outputs, expected {} for {}",
                self.actor.output_size(),
                head,
                self.algorithm
            )));
        }
        if self.algorithm == Algorithm::Ppo {
            match &self.ppo_log_std {
                Some(ls) if ls.len() == self.action_dim => {}
                _ => {
                    return Err(DrlError::Checkpoint(
                        "on-policy checkpoint is missing its log_std vector".into(),
                    ))
                }
            }
        }
        if let Some((mins, maxs)) = &self.normalization_bounds {
            if mins.len() != self.obs_dim || maxs.len() != self.obs_dim {
                return Err(DrlError::Checkpoint(
                    "normalization bounds do not match obs_dim".into(),
                ));
            }
        }
        Ok(())
    }

    /// Runs the policy on a normalized observation. Deterministic mode is
    /// the mean action; stochastic mode draws with the caller's generator
    /// using the same noise model as training-time exploration.
    pub fn act(
        &self,
        obs: &[F],
        deterministic: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<F>, DrlError> {
        if obs.len() != self.obs_dim {
            return Err(DrlError::ShapeMismatch {
                expected: self.obs_dim,
                got: obs.len(),
            });
        }
        let out = self.actor.forward(obs)?;
        let action = match self.algorithm {
            Algorithm::Sac => {
                let (mu, log_std) = split_head(&out, self.action_dim);
                if deterministic {
                    mu.iter().map(|m| m.tanh()).collect()
                } else {
                    let eps = draw_noise(self.action_dim, rng);
                    squash_sample(mu, log_std, &eps).a
                }
            }
            Algorithm::Td3 => {
                let mut a: Vec<F> = out.iter().map(|p| p.tanh()).collect();
                if !deterministic {
                    let eps = draw_noise::<F, _>(self.action_dim, rng);
                    let sigma = self.agent_config.exploration_noise;
                    for (x, e) in a.iter_mut().zip(eps) {
                        *x = (*x + sigma * e).max(-F::one()).min(F::one());
                    }
                }
                a
            }
            Algorithm::Ppo => {
                let log_std = self.ppo_log_std.as_deref().ok_or_else(|| {
                    DrlError::Checkpoint("missing log_std for on-policy checkpoint".into())
                })?;
                if deterministic {
                    out.iter().map(|m| m.tanh()).collect()
                } else {
                    let eps = draw_noise::<F, _>(self.action_dim, rng);
                    out.iter()
                        .zip(log_std)
                        .zip(eps)
                        .map(|((&m, &ls), e)| (m + ls.exp() * e).tanh())
                        .collect()
                }
            }
        };
        Ok(action)
    }

    pub fn to_json(&self) -> Result<String, DrlError> {
        serde_json::to_string_pretty(self)
            .map_err(|e| DrlError::Checkpoint(format!("serialize: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self, DrlError> {
        let policy: Self = serde_json::from_str(text)
            .map_err(|e| DrlError::Checkpoint(format!("parse: {e}")))?;
        policy.validate()?;
        Ok(policy)
    }

    pub fn save(&self, path: &Path) -> Result<(), DrlError> {
        fs::write(path, self.to_json()?)
            .map_err(|e| DrlError::Checkpoint(format!("write {}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, DrlError> {
        let text = fs::read_to_string(path)
            .map_err(|e| DrlError::Checkpoint(format!("read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(algorithm: Algorithm) -> AgentConfig<f64> {
        AgentConfig {
            hidden_sizes: vec![8, 8],
            batch_size: 4,
            buffer_size: 64,
            n_steps: 8,
            n_epochs: 2,
            seed: 7,
            ..AgentConfig::defaults(algorithm)
        }
    }

    fn drive(agent: &mut Agent<f64>, steps: usize) {
        let obs = vec![0.1; agent.obs_dim()];
        for _ in 0..steps {
            let a = agent.act_stochastic(&obs).unwrap();
            let r = -(a[0] - 0.3_f64).powi(2);
            agent.record(&obs.clone(), &a, r, &obs, true).unwrap();
        }
    }

    #[test]
    fn agents_build_for_every_algorithm_and_update() {
        for alg in Algorithm::ALL {
            let mut agent = Agent::new(5, 2, small_cfg(alg)).unwrap();
            drive(&mut agent, 20);
            assert!(
                agent.gradient_updates() > 0,
                "{alg} never updated in 20 steps"
            );
        }
    }

    #[test]
    fn deterministic_actions_repeat_exactly() {
        for alg in Algorithm::ALL {
            let agent = Agent::new(4, 2, small_cfg(alg)).unwrap();
            let obs = vec![0.3, -0.1, 0.9, 0.0];
            assert_eq!(
                agent.act_deterministic(&obs).unwrap(),
                agent.act_deterministic(&obs).unwrap(),
                "{alg}"
            );
        }
    }

    #[test]
    fn identical_seeds_give_identical_parameter_trajectories() {
        for alg in Algorithm::ALL {
            let run = || {
                let mut agent = Agent::new(4, 1, small_cfg(alg)).unwrap();
                drive(&mut agent, 24);
                agent.policy().actor.params().to_vec()
            };
            assert_eq!(run(), run(), "{alg} diverged across identical runs");
        }
    }

    #[test]
    fn checkpoints_round_trip_bit_exactly() {
        for alg in Algorithm::ALL {
            let mut agent = Agent::new(4, 2, small_cfg(alg)).unwrap();
            drive(&mut agent, 16);
            let policy = agent
                .policy()
                .with_normalization_bounds(vec![0.0; 4], vec![1.0; 4]);
            let json = policy.to_json().unwrap();
            let loaded = TrainedPolicy::<f64>::from_json(&json).unwrap();
            assert_eq!(loaded.actor.params(), policy.actor.params());
            assert_eq!(loaded.to_json().unwrap(), json);

            let obs = vec![0.2, 0.4, 0.6, 0.8];
            let mut r1 = ChaCha8Rng::seed_from_u64(3);
            let mut r2 = ChaCha8Rng::seed_from_u64(3);
            assert_eq!(
                policy.act(&obs, false, &mut r1).unwrap(),
                loaded.act(&obs, false, &mut r2).unwrap()
            );
            assert_eq!(
                policy.act(&obs, true, &mut r1).unwrap(),
                loaded.act(&obs, true, &mut r2).unwrap()
            );
        }
    }

    #[test]
    fn checkpoint_rejects_bad_version_and_shapes() {
        let agent = Agent::new(3, 1, small_cfg(Algorithm::Sac)).unwrap();
        let mut policy = agent.policy();
        policy.format_version = 99;
        let err = TrainedPolicy::<f64>::from_json(&policy.to_json().unwrap())
            .unwrap_err()
            .to_string();
        assert!(err.contains("format_version 99"), "{err}");

        let mut policy = agent.policy();
        policy.obs_dim = 7;
        assert!(policy.validate().is_err());

        assert!(TrainedPolicy::<f64>::from_json("{not json").is_err());
    }

    #[test]
    fn clearing_experience_empties_replay_but_keeps_weights() {
        let mut agent = Agent::new(4, 1, small_cfg(Algorithm::Td3)).unwrap();
        drive(&mut agent, 10);
        let weights = agent.policy().actor.params().to_vec();
        assert!(agent.buffered() > 0);
        agent.clear_experience();
        assert_eq!(agent.buffered(), 0);
        assert_eq!(agent.policy().actor.params(), &weights[..]);
    }

    #[test]
    fn wrong_observation_size_is_reported() {
        let mut agent = Agent::new(4, 1, small_cfg(Algorithm::Sac)).unwrap();
        assert!(matches!(
            agent.act_stochastic(&[0.0; 3]),
            Err(DrlError::ShapeMismatch { expected: 4, got: 3 })
        ));
    }
}

//! From-scratch deep reinforcement learning on plain `Vec` math: dense
//! networks with exact reverse-mode gradients, Adam, experience replay,
//! generalized advantage estimation, and three continuous-control learners
//! (SAC, TD3, PPO) that share the same actor plumbing.
//!
//! Everything is driven by explicitly threaded seeded generators and 64-bit
//! (or 32-bit, via the scalar parameter) floats, so training runs are
//! bit-reproducible and every analytic gradient can be pinned against finite
//! differences in tests.

pub mod adam;
pub mod buffer;
pub mod gae;
pub mod gaussian;
pub mod net;
pub mod policy;
pub mod ppo;
pub mod sac;
pub mod td3;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use adam::Adam;
pub use buffer::{Batch, ReplayBuffer, Transition};
pub use gae::gae;
pub use net::{polyak_update, DenseNet};
pub use policy::{Agent, TrainedPolicy, CHECKPOINT_FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum DrlError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("not enough samples buffered: have {have}, need {need}")]
    NotEnoughSamples { have: usize, need: usize },
    #[error("rollout too short: {have} steps collected")]
    RolloutTooShort { have: usize },
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sac,
    Td3,
    Ppo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Sac, Algorithm::Td3, Algorithm::Ppo];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sac => "sac",
            Algorithm::Td3 => "td3",
            Algorithm::Ppo => "ppo",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = DrlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sac" => Ok(Algorithm::Sac),
            "td3" => Ok(Algorithm::Td3),
            "ppo" => Ok(Algorithm::Ppo),
            other => Err(DrlError::InvalidConfig(format!(
                "unknown algorithm '{other}' (expected sac, td3, or ppo)"
            ))),
        }
    }
}

/// Full hyperparameter set for one agent. Construct with
/// [`AgentConfig::defaults`] and override what you need; fields that do not
/// apply to the chosen algorithm are ignored by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAgentConfig<F>", bound(deserialize = "F: Scalar"))]
pub struct AgentConfig<F> {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub learning_rate: F,
    pub gamma: F,
    pub batch_size: usize,
    /// Hidden layer widths of every network the agent builds.
    pub hidden_sizes: Vec<usize>,
    /// Replay capacity (SAC, TD3).
    pub buffer_size: usize,
    /// Polyak averaging coefficient for target networks (SAC, TD3).
    pub tau: F,
    /// Environment steps to collect before the first gradient update
    /// (SAC, TD3). Updates additionally wait for `batch_size` samples.
    pub learning_starts: usize,
    /// One gradient update every this many environment steps (SAC, TD3).
    pub train_freq: usize,
    /// Starting entropy coefficient; tuned automatically toward a target
    /// entropy of minus the action dimension (SAC).
    pub initial_alpha: F,
    /// Std of the Gaussian noise added to actions while collecting (TD3).
    pub exploration_noise: F,
    /// Std of the smoothing noise on target-policy actions (TD3).
    pub target_noise: F,
    /// Clamp bound on the smoothing noise (TD3).
    pub target_noise_clip: F,
    /// Critic updates per actor/target update (TD3).
    pub policy_delay: usize,
    /// Rollout length per update (PPO).
    pub n_steps: usize,
    /// Optimization epochs over each rollout (PPO).
    pub n_epochs: usize,
    /// Advantage estimation lambda (PPO).
    pub gae_lambda: F,
    /// Surrogate objective clip radius (PPO).
    pub clip_range: F,
    /// Value loss weight (PPO).
    pub vf_coef: F,
    /// Entropy bonus weight (PPO).
    pub ent_coef: F,
}

impl<F: Scalar> AgentConfig<F> {
    /// Published per-algorithm defaults: SAC lr 3e-4 / buffer 1e6 / batch
    /// 256 / tau 0.005 / gamma 0.99 on 256x256 nets; TD3 lr 3e-3 / buffer
    /// 1e6 / batch 64 / tau 0.005 / gamma 0.9 on 400x300 nets; PPO lr 1e-3 /
    /// n_steps 4096 / batch 128 / 15 epochs / gamma 0.9 / lambda 0.9 on
    /// 64x64 nets.
    pub fn defaults(algorithm: Algorithm) -> Self {
        let common = Self {
            algorithm,
            seed: 42,
            learning_rate: F::of(3e-4),
            gamma: F::of(0.99),
            batch_size: 256,
            hidden_sizes: vec![256, 256],
            buffer_size: 1_000_000,
            tau: F::of(0.005),
            learning_starts: 0,
            train_freq: 1,
            initial_alpha: F::of(1.0),
            exploration_noise: F::of(0.1),
            target_noise: F::of(0.2),
            target_noise_clip: F::of(0.5),
            policy_delay: 2,
            n_steps: 4096,
            n_epochs: 15,
            gae_lambda: F::of(0.9),
            clip_range: F::of(0.2),
            vf_coef: F::of(0.5),
            ent_coef: F::of(0.0),
        };
        match algorithm {
            Algorithm::Sac => common,
            Algorithm::Td3 => Self {
                learning_rate: F::of(3e-3),
                gamma: F::of(0.9),
                batch_size: 64,
                hidden_sizes: vec![400, 300],
                ..common
            },
            Algorithm::Ppo => Self {
                learning_rate: F::of(1e-3),
                gamma: F::of(0.9),
                batch_size: 128,
                hidden_sizes: vec![64, 64],
                ..common
            },
        }
    }

    pub fn validate(&self) -> Result<(), DrlError> {
        let bad = |msg: String| Err(DrlError::InvalidConfig(msg));
        let in_unit = |name: &str, v: F| {
            if !(v > F::zero() && v <= F::one()) {
                bad(format!("{name} must lie in (0, 1], got {v}"))
            } else {
                Ok(())
            }
        };
        if !(self.learning_rate.is_finite() && self.learning_rate > F::zero()) {
            return bad(format!(
                "learning_rate must be a positive real, got {}",
                self.learning_rate
            ));
        }
        in_unit("gamma", self.gamma)?;
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if self.hidden_sizes.is_empty() || self.hidden_sizes.iter().any(|&h| h == 0) {
            return bad("hidden_sizes must be non-empty and positive".into());
        }
        match self.algorithm {
            Algorithm::Sac | Algorithm::Td3 => {
                in_unit("tau", self.tau)?;
                if self.buffer_size < self.batch_size {
                    return bad(format!(
                        "buffer_size {} cannot hold one batch of {}",
                        self.buffer_size, self.batch_size
                    ));
                }
                if self.train_freq == 0 {
                    return bad("train_freq must be positive".into());
                }
            }
            Algorithm::Ppo => {
                in_unit("gae_lambda", self.gae_lambda)?;
                if self.n_epochs == 0 {
                    return bad("n_epochs must be positive".into());
                }
                if self.n_steps < self.batch_size {
                    return bad(format!(
                        "n_steps {} must be at least batch_size {}",
                        self.n_steps, self.batch_size
                    ));
                }
                if !(self.clip_range > F::zero()) {
                    return bad("clip_range must be positive".into());
                }
                if self.vf_coef < F::zero() || self.ent_coef < F::zero() {
                    return bad("loss coefficients must be non-negative".into());
                }
            }
        }
        if self.algorithm == Algorithm::Sac && !(self.initial_alpha > F::zero()) {
            return bad("initial_alpha must be positive".into());
        }
        if self.algorithm == Algorithm::Td3 {
            if self.policy_delay == 0 {
                return bad("policy_delay must be positive".into());
            }
            if self.exploration_noise < F::zero()
                || self.target_noise < F::zero()
                || self.target_noise_clip < F::zero()
            {
                return bad("noise parameters must be non-negative".into());
            }
        }
        Ok(())
    }
}

/// Serde front for [`AgentConfig`]: only `algorithm` is required, everything
/// else falls back to that algorithm's defaults.
#[derive(Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "F: Scalar"))]
struct RawAgentConfig<F> {
    algorithm: Algorithm,
    seed: Option<u64>,
    learning_rate: Option<F>,
    gamma: Option<F>,
    batch_size: Option<usize>,
    hidden_sizes: Option<Vec<usize>>,
    buffer_size: Option<usize>,
    tau: Option<F>,
    learning_starts: Option<usize>,
    train_freq: Option<usize>,
    initial_alpha: Option<F>,
    exploration_noise: Option<F>,
    target_noise: Option<F>,
    target_noise_clip: Option<F>,
    policy_delay: Option<usize>,
    n_steps: Option<usize>,
    n_epochs: Option<usize>,
    gae_lambda: Option<F>,
    clip_range: Option<F>,
    vf_coef: Option<F>,
    ent_coef: Option<F>,
}

impl<F: Scalar> TryFrom<RawAgentConfig<F>> for AgentConfig<F> {
    type Error = DrlError;

    fn try_from(raw: RawAgentConfig<F>) -> Result<Self, Self::Error> {
        let mut cfg = AgentConfig::defaults(raw.algorithm);
        macro_rules! take {
            ($($field:ident),* $(,)?) => {
                $(if let Some(v) = raw.$field { cfg.$field = v; })*
            };
        }
        take!(
            seed,
            learning_rate,
            gamma,
            batch_size,
            hidden_sizes,
            buffer_size,
            tau,
            learning_starts,
            train_freq,
            initial_alpha,
            exploration_noise,
            target_noise,
            target_noise_clip,
            policy_delay,
            n_steps,
            n_epochs,
            gae_lambda,
            clip_range,
            vf_coef,
            ent_coef,
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

//! Ready-made configurations sized for interactive use: one-week episodes
//! with stochastic weather, compact networks, and per-scenario
//! hyperparameter selections.

use crate::drl::{AgentConfig, Algorithm};
use crate::env::{BuildingKind, EnvConfig};
use crate::scalar::Scalar;
use crate::weather::ClimateName;

/// Steps in a one-week episode at the 15-minute timestep.
pub const DESK_EPISODE_STEPS: usize = 672;
/// July 1st, so desk episodes exercise the cooling season.
pub const DESK_START_DAY: u32 = 182;

/// A one-week, stochastic-weather environment for quick experiments.
pub fn desk_env<F: Scalar>(kind: BuildingKind, climate: ClimateName) -> EnvConfig<F> {
    EnvConfig {
        building: kind.building_name().to_string(),
        climate,
        stochastic_weather: true,
        episode_length_steps: DESK_EPISODE_STEPS,
        episode_start_day_of_year: DESK_START_DAY,
        ..EnvConfig::default()
    }
}

/// Agent hyperparameters scaled down for desk runs: [64, 64] networks and a
/// short warmup for the off-policy algorithms. SAC takes one gradient update
/// per two environment steps; TD3 is stabler on these short episodes at one
/// per four. PPO updates once per desk episode.
pub fn desk_agent<F: Scalar>(algorithm: Algorithm) -> AgentConfig<F> {
    let mut cfg = AgentConfig::defaults(algorithm);
    cfg.hidden_sizes = vec![64, 64];
    match algorithm {
        Algorithm::Sac | Algorithm::Td3 => {
            cfg.batch_size = 64;
            cfg.learning_starts = 256;
            cfg.train_freq = if algorithm == Algorithm::Td3 { 4 } else { 2 };
            cfg.buffer_size = 100_000;
        }
        Algorithm::Ppo => {
            cfg.n_steps = DESK_EPISODE_STEPS;
            cfg.batch_size = 64;
            cfg.n_epochs = 10;
        }
    }
    cfg
}

/// Full-scale hyperparameters for a building/climate scenario: the
/// per-algorithm defaults, except that TD3 on the datacenter under the
/// mixed climate uses batch size 100.
pub fn scenario_agent<F: Scalar>(
    algorithm: Algorithm,
    kind: BuildingKind,
    climate: ClimateName,
) -> AgentConfig<F> {
    let mut cfg = AgentConfig::defaults(algorithm);
    if algorithm == Algorithm::Td3
        && kind == BuildingKind::TwoZoneDatacenter
        && climate == ClimateName::Mixed
    {
        cfg.batch_size = 100;
    }
    cfg
}

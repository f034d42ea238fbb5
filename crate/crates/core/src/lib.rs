//! HVAC control benchmark harness: a lumped-RC building surrogate, gym-style
//! environments for an office and a datacenter under three climates,
//! rule-based baselines, from-scratch SAC/TD3/PPO agents, and an experiment
//! runner with reproducible CSV outputs.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the crate's default precision at `f64`, which is what the
//! experiment harness and CLI use.

pub mod building;
pub mod controllers;
pub mod drl;
pub mod env;
pub mod experiments;
pub mod scalar;
pub mod weather;

pub use scalar::Scalar;

/// Default scalar precision for the shipped harness.
pub type Real = f64;

pub type WeatherTick = weather::WeatherTick<Real>;
pub type WeatherSeries = weather::WeatherSeries<Real>;
pub type ClimateProfile = weather::ClimateProfile<Real>;
pub type OuParams = weather::OuParams<Real>;
pub type ZoneParams = building::ZoneParams<Real>;
pub type BuildingModel = building::BuildingModel<Real>;
pub type ZoneState = building::ZoneState<Real>;
pub type Action = env::Action<Real>;
pub type RewardConfig = env::RewardConfig<Real>;
pub type StepInfo = env::StepInfo<Real>;
pub type EnvConfig = env::EnvConfig<Real>;
pub type HvacEnv = env::HvacEnv<Real>;
pub type DenseNet = drl::DenseNet<Real>;
pub type AgentConfig = drl::AgentConfig<Real>;
pub type TrainedPolicy = drl::TrainedPolicy<Real>;
pub type TrainSchedule = experiments::TrainSchedule;
pub type MetricsSummary = experiments::MetricsSummary<Real>;
pub type TrainOutcome = experiments::TrainOutcome<Real>;

/// Deterministic seed derivation for sub-streams (episodes, evaluations,
/// parallel cells). splitmix64 of the base seed xored with a role tag.
pub fn derive_seed(base: u64, tag: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

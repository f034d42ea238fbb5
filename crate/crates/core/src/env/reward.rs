//! Reward: a pure penalty balancing electric power against comfort.
//!
//! ```text
//! r = -(1 - omega) * lambda_p * P  -  omega * lambda_t * sum_z dev_z
//! ```
//!
//! where `dev_z` is the distance of zone z's temperature outside the active
//! comfort range. `omega` weighs comfort: at `omega = 1` the reward ignores
//! power entirely, at `omega = 0` it ignores temperature.

use chrono::{Datelike, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::EnvError;

/// When each comfort range applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComfortSchedule {
    /// Office occupancy comfort: (23, 26) degrees C June through September,
    /// (20, 23.5) the rest of the year.
    SeasonalOffice,
    /// Server-room envelope: (18, 27) degrees C year round.
    Datacenter,
}

impl ComfortSchedule {
    /// Active comfort range (low, high) in degrees C on the given date.
    pub fn range_for<F: Scalar>(self, date: NaiveDateTime) -> (F, F) {
        match self {
            ComfortSchedule::SeasonalOffice => {
                if (6..=9).contains(&date.month()) {
                    (F::of(23.0), F::of(26.0))
                } else {
                    (F::of(20.0), F::of(23.5))
                }
            }
            ComfortSchedule::Datacenter => (F::of(18.0), F::of(27.0)),
        }
    }
}

/// Weights of the reward penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardConfig<F> {
    /// Comfort weight in [0, 1]; power gets weight `1 - omega`.
    pub omega: F,
    /// Power scaling, 1/W.
    pub lambda_p: F,
    /// Comfort-deviation scaling, 1/degC.
    pub lambda_t: F,
    /// Comfort range calendar; `None` follows the building's default.
    #[serde(default)]
    pub comfort_schedule: Option<ComfortSchedule>,
}

impl<F: Scalar> Default for RewardConfig<F> {
    fn default() -> Self {
        Self {
            omega: F::of(0.5),
            lambda_p: F::of(1e-4),
            lambda_t: F::one(),
            comfort_schedule: None,
        }
    }
}

impl<F: Scalar> RewardConfig<F> {
    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.omega >= F::zero() && self.omega <= F::one()) {
            return Err(EnvError::InvalidConfig(format!(
                "reward.omega must lie in [0, 1], got {}",
                self.omega
            )));
        }
        if !(self.lambda_p > F::zero()) || !(self.lambda_t > F::zero()) {
            return Err(EnvError::InvalidConfig(format!(
                "reward scalings must be positive, got lambda_p={} lambda_t={}",
                self.lambda_p, self.lambda_t
            )));
        }
        Ok(())
    }
}

/// Per-step outcome released alongside the reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo<F> {
    /// Facility electric power over the step, W.
    pub electric_power: F,
    /// Sum over controlled zones of degrees outside the comfort range.
    pub comfort_violation: F,
    /// Weighted power penalty, >= 0; enters the reward negated.
    pub power_term: F,
    /// Weighted comfort penalty, >= 0; enters the reward negated.
    pub comfort_term: F,
}

/// Evaluates the penalty for one step.
pub fn compute_reward<F: Scalar>(
    power: F,
    zone_temps: &[F],
    range: (F, F),
    cfg: &RewardConfig<F>,
) -> (F, StepInfo<F>) {
    let (low, high) = range;
    let mut deviation = F::zero();
    for &t in zone_temps {
        deviation += (t - high).max(F::zero()) + (low - t).max(F::zero());
    }
    let power_term = (F::one() - cfg.omega) * cfg.lambda_p * power;
    let comfort_term = cfg.omega * cfg.lambda_t * deviation;
    let reward = -power_term - comfort_term;
    (
        reward,
        StepInfo {
            electric_power: power,
            comfort_violation: deviation,
            power_term,
            comfort_term,
        },
    )
}

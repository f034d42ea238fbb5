//! Observation assembly and min-max normalization.
//!
//! Observations are fixed-order vectors: six site weather slots, one block
//! of nine slots per observed zone, facility electric power, then calendar
//! slots (year, month, day, hour). The office exposes one zone block (20
//! slots total); the datacenter exposes west then east (29 slots).
//!
//! Slots the surrogate has no physical model for are documented proxies:
//! mean radiant temperature and "people air temperature" mirror zone air
//! temperature, the dissatisfaction index scales with comfort deviation,
//! clothing is a seasonal constant, and zone humidity is a damped copy of
//! outdoor humidity.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Slots in one per-zone observation block.
pub const ZONE_BLOCK_SLOTS: usize = 9;
/// Leading site weather slots.
pub const SITE_SLOTS: usize = 6;
/// Trailing slots: facility power plus year, month, day, hour.
pub const TAIL_SLOTS: usize = 5;

/// Running min-max normalizer. Starts from documented physical bounds per
/// slot; an out-of-bound value first widens the tracked range and then maps
/// to exactly 0 or 1. A degenerate slot (min == max) maps to 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTracker<F> {
    default_min: Vec<F>,
    default_max: Vec<F>,
    min: Vec<F>,
    max: Vec<F>,
}

impl<F: Scalar> NormalizationTracker<F> {
    pub fn new(bounds: &[(F, F)]) -> Self {
        let default_min: Vec<F> = bounds.iter().map(|b| b.0).collect();
        let default_max: Vec<F> = bounds.iter().map(|b| b.1).collect();
        Self {
            min: default_min.clone(),
            max: default_max.clone(),
            default_min,
            default_max,
        }
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    /// Restores the documented default bounds, forgetting anything learned.
    pub fn reset(&mut self) {
        self.min.clone_from(&self.default_min);
        self.max.clone_from(&self.default_max);
    }

    /// Current bounds, exposed so checkpoints can persist tracker state.
    pub fn bounds(&self) -> Vec<(F, F)> {
        self.min.iter().copied().zip(self.max.iter().copied()).collect()
    }

    pub fn set_bounds(&mut self, bounds: &[(F, F)]) {
        assert_eq!(bounds.len(), self.min.len(), "bounds length mismatch");
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            self.min[i] = lo;
            self.max[i] = hi;
        }
    }

    /// Maps a raw vector into [0,1]^n, widening tracked bounds as needed.
    pub fn normalize(&mut self, raw: &[F]) -> Vec<F> {
        assert_eq!(raw.len(), self.min.len(), "raw observation length mismatch");
        raw.iter()
            .enumerate()
            .map(|(i, &x)| {
                if x < self.min[i] {
                    self.min[i] = x;
                }
                if x > self.max[i] {
                    self.max[i] = x;
                }
                let span = self.max[i] - self.min[i];
                if span == F::zero() {
                    F::of(0.5)
                } else {
                    ((x - self.min[i]) / span).max(F::zero()).min(F::one())
                }
            })
            .collect()
    }
}

/// Inputs for one zone's observation block.
pub(crate) struct ZoneBlockInput<F> {
    pub heating_sp: F,
    pub cooling_sp: F,
    pub temp: F,
    pub outdoor_rh: F,
    /// Degrees outside the active comfort range for this zone.
    pub comfort_dev: F,
    /// True during the June-September clothing season.
    pub summer: bool,
    pub occupants: F,
}

/// Predicted-percentage-dissatisfied proxy: 5% inside the comfort range,
/// rising linearly to 100% at 3 degrees C outside it.
pub(crate) fn ppd_proxy<F: Scalar>(comfort_dev: F) -> F {
    F::of(5.0) + F::of(95.0) * (comfort_dev / F::of(3.0)).min(F::one())
}

/// Seasonal clothing insulation constant (clo): light in summer.
pub(crate) fn clothing_proxy<F: Scalar>(summer: bool) -> F {
    if summer {
        F::of(0.5)
    } else {
        F::of(1.0)
    }
}

/// Indoor humidity follows outdoor humidity with strong damping.
pub(crate) fn zone_rh_proxy<F: Scalar>(outdoor_rh: F) -> F {
    (F::of(30.0) + F::of(0.4) * outdoor_rh)
        .max(F::zero())
        .min(F::of(100.0))
}

pub(crate) fn push_zone_block<F: Scalar>(out: &mut Vec<F>, z: &ZoneBlockInput<F>) {
    out.push(z.heating_sp);
    out.push(z.cooling_sp);
    out.push(z.temp);
    out.push(z.temp); // mean radiant proxy
    out.push(zone_rh_proxy(z.outdoor_rh));
    out.push(clothing_proxy(z.summer));
    out.push(ppd_proxy(z.comfort_dev));
    out.push(z.occupants);
    out.push(z.temp); // people air temperature proxy
}

/// Default normalization bounds for the six site slots.
pub(crate) fn site_bounds<F: Scalar>() -> Vec<(F, F)> {
    vec![
        (F::of(-20.0), F::of(45.0)), // drybulb C
        (F::of(0.0), F::of(100.0)),  // relative humidity %
        (F::of(0.0), F::of(20.0)),   // wind m/s
        (F::of(0.0), F::of(360.0)),  // wind direction deg
        (F::of(0.0), F::of(500.0)),  // diffuse W/m2
        (F::of(0.0), F::of(1000.0)), // direct W/m2
    ]
}

/// Default normalization bounds for one zone block.
pub(crate) fn zone_block_bounds<F: Scalar>() -> Vec<(F, F)> {
    vec![
        (F::of(15.0), F::of(22.5)),  // heating setpoint C
        (F::of(22.5), F::of(30.0)),  // cooling setpoint C
        (F::of(-30.0), F::of(60.0)), // zone air C
        (F::of(-30.0), F::of(60.0)), // mean radiant C
        (F::of(0.0), F::of(100.0)),  // zone humidity %
        (F::of(0.0), F::of(2.0)),    // clothing clo
        (F::of(0.0), F::of(100.0)),  // dissatisfaction %
        (F::of(0.0), F::of(20.0)),   // occupants
        (F::of(-30.0), F::of(60.0)), // people air C
    ]
}

/// Default bounds for power and calendar slots. `max_electric_w` should be
/// the building's theoretical peak electric draw so the slot spans [0,1].
pub(crate) fn tail_bounds<F: Scalar>(max_electric_w: F) -> Vec<(F, F)> {
    vec![
        (F::zero(), max_electric_w),
        (F::of(2000.0), F::of(2050.0)), // year
        (F::of(1.0), F::of(12.0)),      // month
        (F::of(1.0), F::of(31.0)),      // day
        (F::of(0.0), F::of(23.0)),      // hour
    ]
}

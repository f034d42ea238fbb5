//! Setpoint actions and their admissible ranges.

use serde::{Deserialize, Serialize};

use crate::building::Setpoints;
use crate::scalar::Scalar;

/// Admissible heating setpoint range, degrees C.
pub const HEATING_SP_RANGE: (f64, f64) = (15.0, 22.5);
/// Admissible cooling setpoint range, degrees C.
pub const COOLING_SP_RANGE: (f64, f64) = (22.5, 30.0);
/// Minimum separation enforced between heating and cooling setpoints.
pub const MIN_SETPOINT_GAP: f64 = 0.1;

/// A setpoint command. The office building takes one pair applied to every
/// zone; the datacenter takes two pairs ordered (east, west).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action<F> {
    pub pairs: Vec<Setpoints<F>>,
}

impl<F: Scalar> Action<F> {
    /// One-pair action for single-thermostat buildings.
    pub fn single(heating: F, cooling: F) -> Self {
        Self {
            pairs: vec![Setpoints { heating, cooling }],
        }
    }

    /// Flat view `[h0, c0, h1, c1, ...]`, the layout agents emit.
    pub fn to_flat(&self) -> Vec<F> {
        self.pairs
            .iter()
            .flat_map(|p| [p.heating, p.cooling])
            .collect()
    }

    /// Builds an action from the flat agent layout. `flat.len()` must be
    /// even; each consecutive pair is (heating, cooling).
    pub fn from_flat(flat: &[F]) -> Self {
        assert!(flat.len() % 2 == 0, "flat action length must be even");
        Self {
            pairs: flat
                .chunks_exact(2)
                .map(|c| Setpoints {
                    heating: c[0],
                    cooling: c[1],
                })
                .collect(),
        }
    }

    /// Number of scalar components agents must produce.
    pub fn dim(&self) -> usize {
        self.pairs.len() * 2
    }

    /// Maps agent outputs in `[-1, 1]` affinely onto the setpoint box:
    /// -1 is the range floor (heating 15, cooling 22.5), +1 the ceiling
    /// (heating 22.5, cooling 30). Values outside `[-1, 1]` land outside
    /// the box and are then repaired by [`clamp_action`].
    pub fn from_squashed(units: &[F]) -> Self {
        assert!(units.len() % 2 == 0, "squashed action length must be even");
        let half = F::of(0.5);
        let affine = |a: F, range: (f64, f64)| {
            F::of(range.0) + (a + F::one()) * half * F::of(range.1 - range.0)
        };
        let raw = Self {
            pairs: units
                .chunks_exact(2)
                .map(|c| Setpoints {
                    heating: affine(c[0], HEATING_SP_RANGE),
                    cooling: affine(c[1], COOLING_SP_RANGE),
                })
                .collect(),
        };
        clamp_action(&raw)
    }
}

/// Forces every pair into the admissible box, then repairs ordering: if the
/// heating setpoint ends up at or above the cooling one it is pulled to
/// [`MIN_SETPOINT_GAP`] below. Since the ranges only meet at 22.5 degrees C,
/// the repair can only trigger there, e.g. (22.5, 22.5) -> (22.4, 22.5).
pub fn clamp_action<F: Scalar>(raw: &Action<F>) -> Action<F> {
    let pairs = raw
        .pairs
        .iter()
        .map(|p| {
            let mut heating = p
                .heating
                .max(F::of(HEATING_SP_RANGE.0))
                .min(F::of(HEATING_SP_RANGE.1));
            let cooling = p
                .cooling
                .max(F::of(COOLING_SP_RANGE.0))
                .min(F::of(COOLING_SP_RANGE.1));
            if heating >= cooling {
                heating = cooling - F::of(MIN_SETPOINT_GAP);
            }
            Setpoints { heating, cooling }
        })
        .collect();
    Action { pairs }
}

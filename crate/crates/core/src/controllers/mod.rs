//! Non-learning baseline controllers: a season-switched static rule for the
//! office, a degree-by-degree integral rule for the datacenter, and a
//! uniform random agent.

use chrono::{Datelike, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::building::Setpoints;
use crate::env::{clamp_action, Action, BuildingKind, COOLING_SP_RANGE, HEATING_SP_RANGE};
use crate::scalar::Scalar;

/// Static seasonal setpoints for the office: a relaxed warm band June
/// through September, a tighter band the rest of the year. A pure function
/// of the calendar month.
pub fn rbc_5zone<F: Scalar>(date: NaiveDateTime) -> Action<F> {
    if (6..=9).contains(&date.month()) {
        Action::single(F::of(26.0), F::of(29.0))
    } else {
        Action::single(F::of(20.0), F::of(23.5))
    }
}

/// State carried by the integral datacenter rule between steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbcState<F> {
    /// Setpoints currently commanded, one pair per controlled zone in
    /// action order (east, west for the datacenter).
    pub current_setpoints: Action<F>,
    /// Correction applied per step when a zone leaves its range, degrees C.
    pub step_size: F,
}

impl<F: Scalar> RbcState<F> {
    /// Starting point for the datacenter: both pairs at the comfort range
    /// edges (18, 27), corrected by 1 degree C per step.
    pub fn datacenter_default() -> Self {
        Self {
            current_setpoints: Action {
                pairs: vec![
                    Setpoints {
                        heating: F::of(18.0),
                        cooling: F::of(27.0),
                    };
                    2
                ],
            },
            step_size: F::one(),
        }
    }
}

/// Degree-by-degree integral rule: per zone, if the temperature exceeds
/// 27 degrees C both setpoints drop by `step_size`; below 18 both rise.
/// `zone_temps` is indexed like the setpoint pairs (east, west). Setpoints
/// saturate at the admissible ranges rather than drifting past them.
pub fn rbc_datacenter<F: Scalar>(
    zone_temps: &[F],
    mut state: RbcState<F>,
) -> (Action<F>, RbcState<F>) {
    assert_eq!(
        zone_temps.len(),
        state.current_setpoints.pairs.len(),
        "one temperature per controlled zone"
    );
    let high = F::of(27.0);
    let low = F::of(18.0);
    for (pair, &temp) in state
        .current_setpoints
        .pairs
        .iter_mut()
        .zip(zone_temps)
    {
        let delta = if temp > high {
            -state.step_size
        } else if temp < low {
            state.step_size
        } else {
            F::zero()
        };
        pair.heating = (pair.heating + delta)
            .max(F::of(HEATING_SP_RANGE.0))
            .min(F::of(HEATING_SP_RANGE.1));
        pair.cooling = (pair.cooling + delta)
            .max(F::of(COOLING_SP_RANGE.0))
            .min(F::of(COOLING_SP_RANGE.1));
    }
    (state.current_setpoints.clone(), state)
}

/// Endless stream of uniform random actions over the admissible box,
/// ordering-repaired, reproducible per seed.
pub struct RandomAgent<F> {
    rng: ChaCha8Rng,
    pairs: usize,
    _marker: std::marker::PhantomData<F>,
}

impl<F: Scalar> RandomAgent<F> {
    pub fn new(seed: u64, building: BuildingKind) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            pairs: building.action_pairs(),
            _marker: std::marker::PhantomData,
        }
    }

    pub fn next_action(&mut self) -> Action<F> {
        let pairs = (0..self.pairs)
            .map(|_| Setpoints {
                heating: F::of(self.rng.random_range(HEATING_SP_RANGE.0..=HEATING_SP_RANGE.1)),
                cooling: F::of(self.rng.random_range(COOLING_SP_RANGE.0..=COOLING_SP_RANGE.1)),
            })
            .collect();
        clamp_action(&Action { pairs })
    }
}

impl<F: Scalar> Iterator for RandomAgent<F> {
    type Item = Action<F>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_action())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn date(month: u32, day: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2021, month, day)
            .unwrap()
            .and_hms_opt(9, 0, 0)
            .unwrap()
    }

    #[test]
    fn office_rule_switches_on_calendar_month() {
        assert_eq!(
            rbc_5zone::<f64>(date(7, 15)).pairs[0],
            Setpoints { heating: 26.0, cooling: 29.0 }
        );
        assert_eq!(
            rbc_5zone::<f64>(date(12, 25)).pairs[0],
            Setpoints { heating: 20.0, cooling: 23.5 }
        );
        assert_eq!(
            rbc_5zone::<f64>(date(5, 31)).pairs[0],
            Setpoints { heating: 20.0, cooling: 23.5 }
        );
        assert_eq!(
            rbc_5zone::<f64>(date(6, 1)).pairs[0],
            Setpoints { heating: 26.0, cooling: 29.0 }
        );
    }

    #[test]
    fn datacenter_rule_corrects_only_out_of_range_zones() {
        let state = RbcState::<f64>::datacenter_default();
        let (action, _) = rbc_datacenter(&[28.2, 22.0], state);
        // East (hot) pair dropped by 1, west untouched.
        assert_eq!(action.pairs[0], Setpoints { heating: 17.0, cooling: 26.0 });
        assert_eq!(action.pairs[1], Setpoints { heating: 18.0, cooling: 27.0 });
    }

    #[test]
    fn datacenter_rule_is_a_no_op_in_range() {
        let state = RbcState::<f64>::datacenter_default();
        let before = state.current_setpoints.clone();
        let (action, _) = rbc_datacenter(&[22.0, 22.0], state);
        assert_eq!(action, before);
    }

    #[test]
    fn datacenter_rule_raises_when_cold() {
        let state = RbcState::<f64>::datacenter_default();
        let (action, _) = rbc_datacenter(&[17.0, 17.5], state);
        assert_eq!(action.pairs[0], Setpoints { heating: 19.0, cooling: 28.0 });
        assert_eq!(action.pairs[1], Setpoints { heating: 19.0, cooling: 28.0 });
    }

    #[test]
    fn datacenter_rule_saturates_at_range_bounds() {
        let mut state = RbcState::<f64>::datacenter_default();
        state.current_setpoints.pairs[0] = Setpoints { heating: 15.0, cooling: 22.5 };
        let (action, next) = rbc_datacenter(&[30.0, 22.0], state);
        assert_eq!(action.pairs[0], Setpoints { heating: 15.0, cooling: 22.5 });
        // Repeated pressure keeps it pinned, never below range.
        let (action, _) = rbc_datacenter(&[30.0, 22.0], next);
        assert_eq!(action.pairs[0], Setpoints { heating: 15.0, cooling: 22.5 });
    }

    #[test]
    fn random_agent_is_reproducible() {
        let a: Vec<_> = RandomAgent::<f64>::new(42, BuildingKind::FiveZone)
            .take(20)
            .collect();
        let b: Vec<_> = RandomAgent::<f64>::new(42, BuildingKind::FiveZone)
            .take(20)
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn random_heating_mean_sits_at_the_interval_midpoint() {
        let mut agent = RandomAgent::<f64>::new(42, BuildingKind::FiveZone);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| agent.next_action().pairs[0].heating)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 18.75).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn random_datacenter_actions_have_two_pairs() {
        let mut agent = RandomAgent::<f64>::new(1, BuildingKind::TwoZoneDatacenter);
        assert_eq!(agent.next_action().pairs.len(), 2);
    }

    proptest! {
        #[test]
        fn datacenter_rule_moves_at_most_step_size_and_stays_in_range(
            t_east in 0.0f64..45.0,
            t_west in 0.0f64..45.0,
            h0 in 15.0f64..22.5,
            c0 in 22.5f64..30.0,
        ) {
            let mut state = RbcState::<f64>::datacenter_default();
            for pair in &mut state.current_setpoints.pairs {
                pair.heating = h0;
                pair.cooling = c0;
            }
            let (action, _) = rbc_datacenter(&[t_east, t_west], state);
            for pair in &action.pairs {
                prop_assert!((pair.heating - h0).abs() <= 1.0 + 1e-12);
                prop_assert!((pair.cooling - c0).abs() <= 1.0 + 1e-12);
                prop_assert!((15.0..=22.5).contains(&pair.heating));
                prop_assert!((22.5..=30.0).contains(&pair.cooling));
            }
        }

        #[test]
        fn random_actions_always_lie_in_the_box(seed in 0u64..500) {
            let mut agent = RandomAgent::<f64>::new(seed, BuildingKind::TwoZoneDatacenter);
            for action in agent.by_ref().take(50) {
                for pair in &action.pairs {
                    prop_assert!((15.0..=22.5).contains(&pair.heating) || pair.heating == 22.4);
                    prop_assert!((22.5..=30.0).contains(&pair.cooling));
                    prop_assert!(pair.heating < pair.cooling);
                }
            }
        }
    }
}

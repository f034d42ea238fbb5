//! Ornstein-Uhlenbeck perturbation of a weather series.
//!
//! The discrete recurrence
//!
//! ```text
//! x[0]   = 0
//! x[t+1] = (1 - tau) * x[t] + tau * mu + sigma * sqrt(tau) * eps[t]
//! ```
//!
//! with `eps[t] ~ N(0, 1)` produces a mean-reverting offset that is added to
//! the drybulb temperature only. For `mu = 0` the stationary distribution has
//! mean 0 and variance `sigma^2 / (2 - tau)`, which the tests check against
//! long-run sample moments.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{WeatherError, WeatherSeries};
use crate::scalar::Scalar;

/// Parameters of the perturbation process. Construct through [`OuParams::new`]
/// so that `sigma >= 0` and `0 < tau <= 1` always hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOuParams<F>", bound(deserialize = "F: Scalar"))]
pub struct OuParams<F> {
    sigma: F,
    mu: F,
    tau: F,
}

#[derive(Deserialize)]
struct RawOuParams<F> {
    sigma: F,
    mu: F,
    tau: F,
}

impl<F: Scalar> TryFrom<RawOuParams<F>> for OuParams<F> {
    type Error = WeatherError;

    fn try_from(raw: RawOuParams<F>) -> Result<Self, Self::Error> {
        Self::new(raw.sigma, raw.mu, raw.tau)
    }
}

impl<F: Scalar> OuParams<F> {
    pub fn new(sigma: F, mu: F, tau: F) -> Result<Self, WeatherError> {
        if !(sigma >= F::zero()) || !sigma.is_finite() {
            return Err(WeatherError::InvalidOuParams(format!(
                "sigma must be finite and >= 0, got {sigma}"
            )));
        }
        if !(tau > F::zero() && tau <= F::one()) {
            return Err(WeatherError::InvalidOuParams(format!(
                "tau must lie in (0, 1], got {tau}"
            )));
        }
        if !mu.is_finite() {
            return Err(WeatherError::InvalidOuParams(format!(
                "mu must be finite, got {mu}"
            )));
        }
        Ok(Self { sigma, mu, tau })
    }

    pub fn sigma(&self) -> F {
        self.sigma
    }

    pub fn mu(&self) -> F {
        self.mu
    }

    pub fn tau(&self) -> F {
        self.tau
    }

    /// Variance of the stationary distribution for `mu = 0`.
    pub fn stationary_variance(&self) -> F {
        self.sigma * self.sigma / (F::of(2.0) - self.tau)
    }
}

impl<F: Scalar> Default for OuParams<F> {
    /// sigma 1.0, mu 0.0, tau 0.001: a slow drift with stationary
    /// standard deviation of about 0.7 degrees C.
    fn default() -> Self {
        Self {
            sigma: F::one(),
            mu: F::zero(),
            tau: F::of(0.001),
        }
    }
}

/// Generates `len` values of the process, starting at `x[0] = 0`.
pub fn ou_sequence<F: Scalar>(len: usize, params: &OuParams<F>, rng: &mut impl Rng) -> Vec<F> {
    let mut xs = Vec::with_capacity(len);
    let mut x = F::zero();
    let keep = F::one() - params.tau;
    let pull = params.tau * params.mu;
    let kick = params.sigma * params.tau.sqrt();
    for _ in 0..len {
        xs.push(x);
        let eps: f64 = rng.sample(StandardNormal);
        x = keep * x + pull + kick * F::of(eps);
    }
    xs
}

/// Returns a copy of `series` with the process added to the drybulb
/// temperature. Humidity and the other fields are left untouched aside from
/// re-clamping into their physical ranges.
pub fn ou_perturb<F: Scalar>(
    series: &WeatherSeries<F>,
    params: &OuParams<F>,
    rng: &mut impl Rng,
) -> WeatherSeries<F> {
    let offsets = ou_sequence(series.len(), params, rng);
    let mut out = series.clone();
    for (tick, dx) in out.ticks.iter_mut().zip(offsets) {
        tick.drybulb_temp += dx;
        *tick = tick.sanitized();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::weather::WeatherTick;

    #[test]
    fn rejects_bad_parameters() {
        assert!(OuParams::new(-1.0, 0.0, 0.001).is_err());
        assert!(OuParams::new(1.0, 0.0, 0.0).is_err());
        assert!(OuParams::new(1.0, 0.0, 1.5).is_err());
        assert!(OuParams::new(1.0, f64::NAN, 0.001).is_err());
        assert!(OuParams::new(0.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn zero_sigma_zero_mu_is_identity() {
        let params = OuParams::new(0.0, 0.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs = ou_sequence::<f64>(1000, &params, &mut rng);
        assert!(xs.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn starts_at_zero() {
        let params = OuParams::<f64>::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(ou_sequence(5, &params, &mut rng)[0], 0.0);
    }

    #[test]
    fn long_run_moments_match_closed_form() {
        // tau large enough that 200k steps cover many correlation times.
        let params = OuParams::new(1.0, 0.0, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let xs = ou_sequence::<f64>(200_000, &params, &mut rng);
        let burn = 10_000;
        let tail = &xs[burn..];
        let n = tail.len() as f64;
        let mean = tail.iter().sum::<f64>() / n;
        let var = tail.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let expect = params.stationary_variance();
        assert!(mean.abs() < 0.05, "mean {mean} too far from 0");
        assert!(
            (var - expect).abs() < 0.1 * expect,
            "var {var} vs closed form {expect}"
        );
    }

    #[test]
    fn nonzero_mu_shifts_the_mean() {
        let params = OuParams::new(0.5, 3.0, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs = ou_sequence::<f64>(50_000, &params, &mut rng);
        let mean = xs[5_000..].iter().sum::<f64>() / 45_000.0;
        assert!((mean - 3.0).abs() < 0.2, "mean {mean} should approach mu=3");
    }

    #[test]
    fn perturb_touches_only_drybulb_and_reclamps() {
        let ticks: Vec<WeatherTick<f64>> = (0..200)
            .map(|i| WeatherTick {
                timestamp: NaiveDate::from_ymd_opt(2021, 1, 1)
                    .unwrap()
                    .and_hms_opt(0, 0, 0)
                    .unwrap()
                    + chrono::Duration::minutes(15 * i),
                drybulb_temp: 10.0,
                relative_humidity: 55.0,
                wind_speed: 2.0,
                wind_direction: 90.0,
                diffuse_solar: 100.0,
                direct_solar: 300.0,
            })
            .collect();
        let series = WeatherSeries::new(900, ticks).unwrap();
        let params = OuParams::new(2.0, 0.0, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let shaken = ou_perturb(&series, &params, &mut rng);

        assert_eq!(shaken.ticks[0].drybulb_temp, 10.0);
        assert!(shaken
            .ticks
            .iter()
            .skip(1)
            .any(|t| t.drybulb_temp != 10.0));
        for (a, b) in series.ticks.iter().zip(&shaken.ticks) {
            assert_eq!(a.relative_humidity, b.relative_humidity);
            assert_eq!(a.wind_speed, b.wind_speed);
            assert_eq!(a.direct_solar, b.direct_solar);
        }
    }
}

//! Synthetic year-long weather generation from a compact climate profile.
//!
//! The generator layers a seasonal cosine, a diurnal cosine, and de-meaned
//! Ornstein-Uhlenbeck noise on top of the profile's annual mean temperature.
//! Both cosines are sampled over whole periods and the noise is centered
//! after generation, so the annual mean drybulb matches the profile exactly
//! up to floating-point rounding. Humidity moves inversely with the
//! temperature deviation, and solar irradiance follows a day-length model
//! attenuated by a humidity-based cloudiness proxy.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ou_sequence, ClimateProfile, OuParams, WeatherSeries, WeatherTick};
use crate::scalar::Scalar;

/// Simulated calendar year. Chosen as a non-leap year so a full year is
/// exactly 365 days, or 35040 quarter-hour ticks.
pub const SYNTH_YEAR: i32 = 2021;
const STEP_SECONDS: u32 = 900;
const STEPS_PER_DAY: usize = 96;
const DAYS: usize = 365;

/// Coldest part of the year, days after Jan 1 (mid January).
const SEASONAL_LAG_DAYS: f64 = 14.0;
/// Coldest hour of the day.
const DIURNAL_LAG_HOURS: f64 = 3.0;

const TEMP_NOISE_SIGMA: f64 = 1.7;
const TEMP_NOISE_TAU: f64 = 0.005;
const RH_NOISE_SIGMA: f64 = 5.0;
const RH_NOISE_TAU: f64 = 0.005;
/// Percent RH lost per degree of positive temperature deviation.
const RH_PER_DEGC: f64 = 1.0;
const WIND_MEAN: f64 = 3.0;
const WIND_DIURNAL: f64 = 1.2;
const WIND_NOISE_SIGMA: f64 = 1.0;
const WIND_NOISE_TAU: f64 = 0.01;
const WIND_DIR_START: f64 = 225.0;
const WIND_DIR_WALK: f64 = 3.0;
/// Clear-sky peak irradiances, W/m2.
const DIRECT_PEAK: f64 = 820.0;
const DIFFUSE_PEAK: f64 = 160.0;

/// Generates one simulated year (35040 ticks, 15-minute step) for the given
/// climate. The same `(profile, seed)` pair always yields the same series.
pub fn synthesize_climate<F: Scalar>(profile: &ClimateProfile<F>, seed: u64) -> WeatherSeries<F> {
    let n = DAYS * STEPS_PER_DAY;
    let noise_scale = profile.noise_scale.as_f64();

    let temp_noise = centered_noise(n, TEMP_NOISE_SIGMA, TEMP_NOISE_TAU, noise_scale, seed, 1);
    let rh_noise = centered_noise(n, RH_NOISE_SIGMA, RH_NOISE_TAU, noise_scale, seed, 2);
    let wind_noise = centered_noise(n, WIND_NOISE_SIGMA, WIND_NOISE_TAU, noise_scale, seed, 3);
    let mut dir_rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, 4, 0));

    let mean_temp = profile.mean_annual_temp.as_f64();
    let mean_rh = profile.mean_annual_rh.as_f64();
    let amp_seasonal = profile.seasonal_amplitude.as_f64();
    let amp_diurnal = profile.diurnal_amplitude.as_f64();

    let start = NaiveDate::from_ymd_opt(SYNTH_YEAR, 1, 1)
        .expect("fixed synthesis year")
        .and_hms_opt(0, 0, 0)
        .expect("midnight exists");

    let mut wind_dir = WIND_DIR_START;
    let mut ticks = Vec::with_capacity(n);
    for i in 0..n {
        let day_frac = i as f64 / STEPS_PER_DAY as f64;
        let hour = (i % STEPS_PER_DAY) as f64 / 4.0;

        let seasonal = -(std::f64::consts::TAU * (day_frac - SEASONAL_LAG_DAYS) / DAYS as f64).cos();
        let diurnal = -(std::f64::consts::TAU * (hour - DIURNAL_LAG_HOURS) / 24.0).cos();

        let temp = mean_temp + amp_seasonal * seasonal + amp_diurnal * diurnal + temp_noise[i];
        let rh = mean_rh - RH_PER_DEGC * (temp - mean_temp) + rh_noise[i];
        let wind = WIND_MEAN + WIND_DIURNAL * diurnal + wind_noise[i];
        let step: f64 = rand::Rng::sample(&mut dir_rng, rand_distr::StandardNormal);
        wind_dir = (wind_dir + WIND_DIR_WALK * noise_scale * step).rem_euclid(360.0);

        let (direct, diffuse) = solar(day_frac, hour, seasonal, rh);

        ticks.push(
            WeatherTick {
                timestamp: start + chrono::Duration::seconds(i as i64 * STEP_SECONDS as i64),
                drybulb_temp: F::of(temp),
                relative_humidity: F::of(rh),
                wind_speed: F::of(wind),
                wind_direction: F::of(wind_dir),
                diffuse_solar: F::of(diffuse),
                direct_solar: F::of(direct),
            }
            .sanitized(),
        );
    }

    WeatherSeries::new(STEP_SECONDS, ticks).expect("fixed-size synthesis")
}

/// OU noise with the sample mean removed, so it never biases annual means.
fn centered_noise(
    n: usize,
    sigma: f64,
    tau: f64,
    scale: f64,
    seed: u64,
    tag: u64,
) -> Vec<f64> {
    if scale == 0.0 {
        return vec![0.0; n];
    }
    let params = OuParams::new(sigma, 0.0, tau).expect("fixed synthesis noise parameters");
    let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, tag, 0));
    let mut xs = ou_sequence::<f64>(n, &params, &mut rng);
    let mean = xs.iter().sum::<f64>() / n as f64;
    for x in &mut xs {
        *x = (*x - mean) * scale;
    }
    xs
}

/// Clear-sky direct and diffuse irradiance at the given moment, attenuated
/// by a cloudiness proxy derived from relative humidity.
fn solar(_day_frac: f64, hour: f64, seasonal: f64, rh: f64) -> (f64, f64) {
    let day_length = 12.0 + 3.0 * seasonal;
    let sunrise = 12.0 - day_length / 2.0;
    let phase = (hour - sunrise) / day_length;
    if !(0.0..=1.0).contains(&phase) {
        return (0.0, 0.0);
    }
    let elevation = (std::f64::consts::PI * phase).sin().max(0.0);
    let attenuation = (1.0 - 0.006 * (rh - 30.0).max(0.0)).clamp(0.25, 1.0);
    let direct = DIRECT_PEAK * elevation * attenuation;
    let diffuse = DIFFUSE_PEAK * elevation * (1.0 + 0.8 * (1.0 - attenuation));
    (direct, diffuse)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annual_means(series: &WeatherSeries<f64>) -> (f64, f64) {
        let n = series.len() as f64;
        let t = series.ticks.iter().map(|t| t.drybulb_temp).sum::<f64>() / n;
        let rh = series.ticks.iter().map(|t| t.relative_humidity).sum::<f64>() / n;
        (t, rh)
    }

    #[test]
    fn year_has_35040_quarter_hour_ticks() {
        let series = synthesize_climate(&ClimateProfile::<f64>::hot_dry(), 42);
        assert_eq!(series.len(), 35040);
        assert_eq!(series.step_seconds, 900);
        assert_eq!(
            series.ticks[0].timestamp.format("%Y-%m-%dT%H:%M").to_string(),
            "2021-01-01T00:00"
        );
        assert_eq!(
            series.ticks[35039].timestamp.format("%m-%dT%H:%M").to_string(),
            "12-31T23:45"
        );
    }

    #[test]
    fn annual_means_match_each_profile() {
        for profile in [
            ClimateProfile::<f64>::hot_dry(),
            ClimateProfile::mixed_humid(),
            ClimateProfile::cool_marine(),
        ] {
            let series = synthesize_climate(&profile, 42);
            let (t, rh) = annual_means(&series);
            assert!(
                (t - profile.mean_annual_temp).abs() < 0.3,
                "{}: drybulb mean {t} vs profile {}",
                profile.name,
                profile.mean_annual_temp
            );
            assert!(
                (rh - profile.mean_annual_rh).abs() < 2.0,
                "{}: rh mean {rh} vs profile {}",
                profile.name,
                profile.mean_annual_rh
            );
        }
    }

    #[test]
    fn summer_is_hotter_than_winter_and_day_hotter_than_night() {
        let series = synthesize_climate(&ClimateProfile::<f64>::hot_dry(), 42);
        let day_mean = |doy: usize| -> f64 {
            series.ticks[doy * 96..(doy + 1) * 96]
                .iter()
                .map(|t| t.drybulb_temp)
                .sum::<f64>()
                / 96.0
        };
        // Mid July vs mid January.
        assert!(day_mean(196) > day_mean(15) + 10.0);

        let jul_3am = series.ticks[196 * 96 + 12].drybulb_temp;
        let jul_3pm = series.ticks[196 * 96 + 60].drybulb_temp;
        assert!(jul_3pm > jul_3am + 5.0);
    }

    #[test]
    fn degenerate_profile_is_constant() {
        let profile = ClimateProfile {
            name: "flat".into(),
            mean_annual_temp: 18.0_f64,
            mean_annual_rh: 50.0,
            seasonal_amplitude: 0.0,
            diurnal_amplitude: 0.0,
            noise_scale: 0.0,
        };
        let series = synthesize_climate(&profile, 123);
        assert!(series.ticks.iter().all(|t| t.drybulb_temp == 18.0));
        assert!(series.ticks.iter().all(|t| t.relative_humidity == 50.0));
    }

    #[test]
    fn same_seed_same_series_different_seed_differs() {
        let profile = ClimateProfile::<f64>::mixed_humid();
        let a = synthesize_climate(&profile, 42);
        let b = synthesize_climate(&profile, 42);
        let c = synthesize_climate(&profile, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn solar_is_zero_at_night_and_positive_at_noon() {
        let series = synthesize_climate(&ClimateProfile::<f64>::hot_dry(), 42);
        for day in [15, 196] {
            let midnight = &series.ticks[day * 96];
            assert_eq!(midnight.direct_solar, 0.0);
            assert_eq!(midnight.diffuse_solar, 0.0);
            let noon = &series.ticks[day * 96 + 48];
            assert!(noon.direct_solar > 300.0);
            assert!(noon.diffuse_solar > 50.0);
        }
    }

    #[test]
    fn humidity_stays_in_physical_range() {
        let series = synthesize_climate(&ClimateProfile::<f64>::cool_marine(), 42);
        assert!(series
            .ticks
            .iter()
            .all(|t| (0.0..=100.0).contains(&t.relative_humidity)));
        assert!(series.ticks.iter().all(|t| t.wind_speed >= 0.0));
    }
}

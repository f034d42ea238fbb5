//! Weather inputs for the simulator: a fixed-step series of outdoor
//! conditions, parsed from EPW files or synthesized from a climate profile,
//! with an optional Ornstein-Uhlenbeck perturbation for robustness studies.

mod epw;
mod ou;
mod synth;

pub use epw::parse_epw;
pub use ou::{ou_perturb, ou_sequence, OuParams};
pub use synth::synthesize_climate;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Timestamp format used in the native CSV form.
pub const CSV_TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M";

/// Header line of the native CSV form.
pub const CSV_HEADER: &str = "timestamp,drybulb_c,rh_pct,wind_ms,wind_deg,diffuse_wm2,direct_wm2";

#[derive(Debug, Error)]
pub enum WeatherError {
    #[error("malformed EPW header: {0}")]
    MalformedHeader(String),
    #[error("data row {row}: expected at least {need} fields, found {got}")]
    ShortRow { row: usize, need: usize, got: usize },
    #[error("data row {row}, field {field}: cannot parse {value:?} as a number")]
    NonNumericField {
        row: usize,
        field: usize,
        value: String,
    },
    #[error("data row {row}: invalid timestamp ({detail})")]
    BadTimestamp { row: usize, detail: String },
    #[error("series is empty")]
    EmptySeries,
    #[error("series step must be a positive number of seconds")]
    BadStep,
    #[error("unknown climate {0:?} (expected hot, mixed, or cool)")]
    UnknownClimate(String),
    #[error("invalid OU parameters: {0}")]
    InvalidOuParams(String),
}

/// Outdoor conditions at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherTick<F> {
    pub timestamp: NaiveDateTime,
    /// Outdoor drybulb temperature, degrees C.
    pub drybulb_temp: F,
    /// Relative humidity, percent in [0, 100].
    pub relative_humidity: F,
    /// Wind speed, m/s, non-negative.
    pub wind_speed: F,
    /// Wind direction, degrees in [0, 360).
    pub wind_direction: F,
    /// Diffuse horizontal solar irradiance, W/m2, non-negative.
    pub diffuse_solar: F,
    /// Direct normal solar irradiance, W/m2, non-negative.
    pub direct_solar: F,
}

impl<F: Scalar> WeatherTick<F> {
    /// Clamps every field into its documented physical range.
    fn sanitized(mut self) -> Self {
        let hundred = F::of(100.0);
        self.relative_humidity = self.relative_humidity.max(F::zero()).min(hundred);
        self.wind_speed = self.wind_speed.max(F::zero());
        self.wind_direction = F::of(self.wind_direction.as_f64().rem_euclid(360.0));
        self.diffuse_solar = self.diffuse_solar.max(F::zero());
        self.direct_solar = self.direct_solar.max(F::zero());
        self
    }
}

/// A weather record sampled at a fixed step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSeries<F> {
    /// Seconds between consecutive ticks.
    pub step_seconds: u32,
    pub ticks: Vec<WeatherTick<F>>,
}

impl<F: Scalar> WeatherSeries<F> {
    pub fn new(step_seconds: u32, ticks: Vec<WeatherTick<F>>) -> Result<Self, WeatherError> {
        if step_seconds == 0 {
            return Err(WeatherError::BadStep);
        }
        if ticks.is_empty() {
            return Err(WeatherError::EmptySeries);
        }
        Ok(Self {
            step_seconds,
            ticks,
        })
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    /// Resamples the series to a new fixed step by linear interpolation
    /// between consecutive ticks. Beyond the last tick the final values are
    /// held. Refining an hourly year (8760 ticks) to 15 minutes yields
    /// 4x the ticks (35040).
    pub fn resample(&self, step_seconds: u32) -> Result<Self, WeatherError> {
        if step_seconds == 0 {
            return Err(WeatherError::BadStep);
        }
        if step_seconds == self.step_seconds {
            return Ok(self.clone());
        }
        let total_seconds = self.step_seconds as u64 * self.ticks.len() as u64;
        let out_len = (total_seconds / step_seconds as u64) as usize;
        let mut ticks = Vec::with_capacity(out_len);
        let start = self.ticks[0].timestamp;
        for i in 0..out_len {
            let t = i as u64 * step_seconds as u64;
            let idx = (t / self.step_seconds as u64) as usize;
            let frac = (t % self.step_seconds as u64) as f64 / self.step_seconds as f64;
            let a = &self.ticks[idx.min(self.ticks.len() - 1)];
            let b = &self.ticks[(idx + 1).min(self.ticks.len() - 1)];
            let w = F::of(frac);
            let lerp = |x: F, y: F| x + (y - x) * w;
            ticks.push(
                WeatherTick {
                    timestamp: start + chrono::Duration::seconds(t as i64),
                    drybulb_temp: lerp(a.drybulb_temp, b.drybulb_temp),
                    relative_humidity: lerp(a.relative_humidity, b.relative_humidity),
                    wind_speed: lerp(a.wind_speed, b.wind_speed),
                    wind_direction: lerp(a.wind_direction, b.wind_direction),
                    diffuse_solar: lerp(a.diffuse_solar, b.diffuse_solar),
                    direct_solar: lerp(a.direct_solar, b.direct_solar),
                }
                .sanitized(),
            );
        }
        Self::new(step_seconds, ticks)
    }

    /// Writes the native CSV form. Floats use the shortest representation
    /// that round-trips, so output is byte-stable across runs.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.ticks.len() * 64 + CSV_HEADER.len() + 1);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for tick in &self.ticks {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                tick.timestamp.format(CSV_TIMESTAMP_FORMAT),
                tick.drybulb_temp,
                tick.relative_humidity,
                tick.wind_speed,
                tick.wind_direction,
                tick.diffuse_solar,
                tick.direct_solar,
            ));
        }
        out
    }

    /// Parses the native CSV form written by [`Self::to_csv_string`].
    /// The step is inferred from the first two timestamps (single-tick
    /// series fall back to one hour).
    pub fn from_csv_str(text: &str) -> Result<Self, WeatherError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| WeatherError::MalformedHeader("empty input".into()))?;
        if header.trim() != CSV_HEADER {
            return Err(WeatherError::MalformedHeader(format!(
                "expected {CSV_HEADER:?}, found {header:?}"
            )));
        }
        let mut ticks = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(WeatherError::ShortRow {
                    row,
                    need: 7,
                    got: fields.len(),
                });
            }
            let timestamp = NaiveDateTime::parse_from_str(fields[0], CSV_TIMESTAMP_FORMAT)
                .map_err(|e| WeatherError::BadTimestamp {
                    row,
                    detail: e.to_string(),
                })?;
            let num = |field: usize| -> Result<F, WeatherError> {
                fields[field]
                    .trim()
                    .parse::<f64>()
                    .map(F::of)
                    .map_err(|_| WeatherError::NonNumericField {
                        row,
                        field,
                        value: fields[field].to_string(),
                    })
            };
            ticks.push(
                WeatherTick {
                    timestamp,
                    drybulb_temp: num(1)?,
                    relative_humidity: num(2)?,
                    wind_speed: num(3)?,
                    wind_direction: num(4)?,
                    diffuse_solar: num(5)?,
                    direct_solar: num(6)?,
                }
                .sanitized(),
            );
        }
        let step_seconds = if ticks.len() >= 2 {
            let delta = (ticks[1].timestamp - ticks[0].timestamp).num_seconds();
            u32::try_from(delta).map_err(|_| WeatherError::BadStep)?
        } else {
            3600
        };
        Self::new(step_seconds, ticks)
    }
}

/// The three bundled climates, ordered mild to harsh in cooling demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClimateName {
    Cool,
    Mixed,
    Hot,
}

impl ClimateName {
    pub const ALL: [ClimateName; 3] = [ClimateName::Cool, ClimateName::Mixed, ClimateName::Hot];

    pub fn as_str(self) -> &'static str {
        match self {
            ClimateName::Cool => "cool",
            ClimateName::Mixed => "mixed",
            ClimateName::Hot => "hot",
        }
    }
}

impl fmt::Display for ClimateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClimateName {
    type Err = WeatherError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cool" | "cool_marine" => Ok(ClimateName::Cool),
            "mixed" | "mixed_humid" => Ok(ClimateName::Mixed),
            "hot" | "hot_dry" => Ok(ClimateName::Hot),
            other => Err(WeatherError::UnknownClimate(other.to_string())),
        }
    }
}

/// Statistical description of a climate, the input to the synthesizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "F: Scalar"))]
pub struct ClimateProfile<F> {
    pub name: String,
    /// Annual mean drybulb temperature, degrees C.
    pub mean_annual_temp: F,
    /// Annual mean relative humidity, percent.
    pub mean_annual_rh: F,
    /// Half swing of the seasonal (annual) temperature cycle, degrees C.
    pub seasonal_amplitude: F,
    /// Half swing of the day/night temperature cycle, degrees C.
    pub diurnal_amplitude: F,
    /// Multiplier on the built-in stochastic components; 0 disables them.
    #[serde(default = "default_noise_scale")]
    pub noise_scale: F,
}

fn default_noise_scale<F: Scalar>() -> F {
    F::one()
}

impl<F: Scalar> ClimateProfile<F> {
    /// Hot and dry: strong seasons, large day/night swing, low humidity.
    pub fn hot_dry() -> Self {
        Self {
            name: "hot_dry".into(),
            mean_annual_temp: F::of(21.7),
            mean_annual_rh: F::of(34.9),
            seasonal_amplitude: F::of(10.0),
            diurnal_amplitude: F::of(7.0),
            noise_scale: F::one(),
        }
    }

    /// Mixed and humid: cold winters, hot summers, damp all year.
    pub fn mixed_humid() -> Self {
        Self {
            name: "mixed_humid".into(),
            mean_annual_temp: F::of(12.6),
            mean_annual_rh: F::of(68.5),
            seasonal_amplitude: F::of(12.0),
            diurnal_amplitude: F::of(4.0),
            noise_scale: F::one(),
        }
    }

    /// Cool marine: mild seasons, small daily swing, very humid.
    pub fn cool_marine() -> Self {
        Self {
            name: "cool_marine".into(),
            mean_annual_temp: F::of(9.3),
            mean_annual_rh: F::of(81.1),
            seasonal_amplitude: F::of(6.0),
            diurnal_amplitude: F::of(4.0),
            noise_scale: F::one(),
        }
    }

    pub fn named(name: ClimateName) -> Self {
        match name {
            ClimateName::Hot => Self::hot_dry(),
            ClimateName::Mixed => Self::mixed_humid(),
            ClimateName::Cool => Self::cool_marine(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn tick(hour: u32, temp: f64) -> WeatherTick<f64> {
        WeatherTick {
            timestamp: NaiveDate::from_ymd_opt(2021, 1, 1)
                .unwrap()
                .and_hms_opt(hour, 0, 0)
                .unwrap(),
            drybulb_temp: temp,
            relative_humidity: 50.0,
            wind_speed: 3.0,
            wind_direction: 180.0,
            diffuse_solar: 0.0,
            direct_solar: 0.0,
        }
    }

    #[test]
    fn resample_hourly_to_quarter_hour_interpolates_linearly() {
        let series = WeatherSeries::new(3600, vec![tick(0, 0.0), tick(1, 4.0)]).unwrap();
        let fine = series.resample(900).unwrap();
        assert_eq!(fine.len(), 8);
        let temps: Vec<f64> = fine.ticks.iter().map(|t| t.drybulb_temp).collect();
        assert_eq!(&temps[..5], &[0.0, 1.0, 2.0, 3.0, 4.0]);
        // Past the final tick the last value is held.
        assert_eq!(&temps[5..], &[4.0, 4.0, 4.0]);
        assert_eq!(
            fine.ticks[1].timestamp.format("%H:%M").to_string(),
            "00:15"
        );
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let series = WeatherSeries::new(3600, vec![tick(0, -3.25), tick(1, 21.7)]).unwrap();
        let text = series.to_csv_string();
        assert!(text.starts_with(CSV_HEADER));
        let back = WeatherSeries::<f64>::from_csv_str(&text).unwrap();
        assert_eq!(back, series);
    }

    #[test]
    fn csv_rejects_wrong_header() {
        let err = WeatherSeries::<f64>::from_csv_str("time,temp\n").unwrap_err();
        assert!(matches!(err, WeatherError::MalformedHeader(_)));
    }

    #[test]
    fn climate_name_parses_aliases() {
        assert_eq!("hot_dry".parse::<ClimateName>().unwrap(), ClimateName::Hot);
        assert_eq!("COOL".parse::<ClimateName>().unwrap(), ClimateName::Cool);
        assert!("tropical".parse::<ClimateName>().is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trips_arbitrary_ticks(
            temps in proptest::collection::vec(-40.0f64..50.0, 1..20),
            rh in 0.0f64..100.0,
        ) {
            let ticks: Vec<_> = temps
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let mut tk = tick((i % 24) as u32, t);
                    tk.relative_humidity = rh;
                    tk.timestamp += chrono::Duration::days((i / 24) as i64);
                    tk
                })
                .collect();
            let series = WeatherSeries::new(3600, ticks).unwrap();
            let back = WeatherSeries::<f64>::from_csv_str(&series.to_csv_string()).unwrap();
            prop_assert_eq!(back, series);
        }

        #[test]
        fn sanitize_bounds_hold(rh in -50.0f64..150.0, dir in -720.0f64..720.0) {
            let mut tk = tick(0, 10.0);
            tk.relative_humidity = rh;
            tk.wind_direction = dir;
            let s = tk.sanitized();
            prop_assert!((0.0..=100.0).contains(&s.relative_humidity));
            prop_assert!((0.0..360.0).contains(&s.wind_direction));
        }
    }
}

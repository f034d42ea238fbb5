//! Lumped-parameter (RC network) building thermal model.
//!
//! Each zone is a single thermal capacitance connected to the outdoor air
//! through an envelope resistance and to neighbouring zones through coupling
//! resistances. An idealized proportional thermostat converts the current
//! setpoint pair into heating and cooling thermal power, and electric power
//! follows from per-mode coefficients of performance. Integration is explicit
//! Euler on the simulation step, with all flux terms evaluated at the old
//! temperatures so the update is order-independent.

mod presets;

pub use presets::{preset, preset_names, preset_toml};

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::weather::WeatherTick;

/// Width of the thermostat's proportional band, degrees C. Full capacity is
/// reached when the zone temperature is this far past the setpoint.
pub const PROPORTIONAL_BAND_DEGC: f64 = 2.0;

#[derive(Debug, Error)]
pub enum BuildingError {
    #[error("building has no zones")]
    NoZones,
    #[error("zone {zone:?}: {field} must be positive, got {value}")]
    NonPositive {
        zone: String,
        field: &'static str,
        value: f64,
    },
    #[error("coupling references unknown zone {0:?}")]
    UnknownZone(String),
    #[error("coupling must join two distinct zones, got {0:?} twice")]
    SelfCoupling(String),
    #[error("unknown building preset {0:?} (available: {1})")]
    UnknownPreset(String, String),
    #[error("cannot parse building definition: {0}")]
    Parse(#[from] toml::de::Error),
}

/// How internal gains vary over the day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainSchedule {
    /// Full gains on weekdays 08:00-18:00, 10% the rest of the time.
    OfficeHours,
    /// Full gains around the clock (server rooms and the like).
    Constant,
}

impl GainSchedule {
    /// Fraction of the peak internal gain active at `when`.
    pub fn fraction(&self, when: NaiveDateTime) -> f64 {
        match self {
            GainSchedule::Constant => 1.0,
            GainSchedule::OfficeHours => {
                let weekday = when.weekday().number_from_monday() <= 5;
                let hour = when.hour();
                if weekday && (8..18).contains(&hour) {
                    1.0
                } else {
                    0.1
                }
            }
        }
    }
}

/// Physical parameters of a single zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneParams<F> {
    pub name: String,
    /// Thermal capacitance, J per degree C.
    #[serde(rename = "thermal_capacitance_j_per_c")]
    pub thermal_capacitance: F,
    /// Resistance between zone air and outdoor air, degrees C per W.
    #[serde(rename = "envelope_resistance_c_per_w")]
    pub envelope_resistance: F,
    /// Peak internal gain (people, lights, equipment), W.
    #[serde(rename = "internal_gain_peak_w")]
    pub internal_gain_peak: F,
    /// Effective glazing area admitting solar radiation, m2.
    #[serde(rename = "solar_aperture_m2")]
    pub solar_aperture: F,
    /// Maximum heating power delivered to the zone, W thermal.
    #[serde(rename = "heating_capacity_w")]
    pub heating_capacity: F,
    /// Heat delivered per unit electric input.
    pub heating_cop: F,
    /// Maximum heat removal, W thermal.
    #[serde(rename = "cooling_capacity_w")]
    pub cooling_capacity: F,
    /// Heat removed per unit electric input.
    pub cooling_cop: F,
}

/// Thermal connection between two zones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling<F> {
    /// Names of the two joined zones.
    pub zones: [String; 2],
    /// Resistance of the shared partition, degrees C per W.
    #[serde(rename = "resistance_c_per_w")]
    pub resistance: F,
}

/// A thermostat setpoint pair for one zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setpoints<F> {
    /// Heat when the zone falls below this, degrees C.
    pub heating: F,
    /// Cool when the zone rises above this, degrees C.
    pub cooling: F,
}

/// Instantaneous thermal state of one zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneState<F> {
    /// Air temperature, degrees C.
    pub temp: F,
}

/// HVAC power drawn by one zone over a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZonePowers<F> {
    /// Heat delivered, W thermal (non-negative).
    pub heating_thermal: F,
    /// Heat removed, W thermal (non-negative).
    pub cooling_thermal: F,
    /// Electric draw, W.
    pub electric: F,
}

/// Power summary for a whole building step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPowers<F> {
    pub zones: Vec<ZonePowers<F>>,
    /// Facility electric power, W.
    pub total_electric: F,
}

/// A validated multi-zone building.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawBuilding<F>", bound(deserialize = "F: Scalar"))]
pub struct BuildingModel<F> {
    pub name: String,
    pub zones: Vec<ZoneParams<F>>,
    pub couplings: Vec<Coupling<F>>,
    pub gain_schedule: GainSchedule,
    /// Fraction of incident solar irradiance absorbed as zone heat.
    pub solar_absorptance: F,
    /// Zone air temperature at the start of an episode, degrees C.
    #[serde(rename = "initial_zone_temp_c")]
    pub initial_zone_temp: F,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBuilding<F> {
    name: String,
    zones: Vec<ZoneParams<F>>,
    #[serde(default)]
    couplings: Vec<Coupling<F>>,
    gain_schedule: GainSchedule,
    solar_absorptance: F,
    #[serde(rename = "initial_zone_temp_c")]
    initial_zone_temp: F,
}

impl<F: Scalar> TryFrom<RawBuilding<F>> for BuildingModel<F> {
    type Error = BuildingError;

    fn try_from(raw: RawBuilding<F>) -> Result<Self, Self::Error> {
        let model = BuildingModel {
            name: raw.name,
            zones: raw.zones,
            couplings: raw.couplings,
            gain_schedule: raw.gain_schedule,
            solar_absorptance: raw.solar_absorptance,
            initial_zone_temp: raw.initial_zone_temp,
        };
        model.validate()?;
        Ok(model)
    }
}

impl<F: Scalar> BuildingModel<F> {
    /// Parses and validates a TOML building definition.
    pub fn from_toml_str(text: &str) -> Result<Self, BuildingError> {
        Ok(toml::from_str(text)?)
    }

    fn validate(&self) -> Result<(), BuildingError> {
        if self.zones.is_empty() {
            return Err(BuildingError::NoZones);
        }
        for zone in &self.zones {
            let positive: [(&'static str, F); 5] = [
                ("thermal_capacitance_j_per_c", zone.thermal_capacitance),
                ("envelope_resistance_c_per_w", zone.envelope_resistance),
                ("heating_cop", zone.heating_cop),
                ("cooling_cop", zone.cooling_cop),
                ("heating_capacity_w + cooling_capacity_w", {
                    // Zones may lack one mode but not both.
                    zone.heating_capacity.max(zone.cooling_capacity)
                }),
            ];
            for (field, value) in positive {
                if !(value > F::zero()) {
                    return Err(BuildingError::NonPositive {
                        zone: zone.name.clone(),
                        field,
                        value: value.as_f64(),
                    });
                }
            }
            for (field, value) in [
                ("internal_gain_peak_w", zone.internal_gain_peak),
                ("solar_aperture_m2", zone.solar_aperture),
                ("heating_capacity_w", zone.heating_capacity),
                ("cooling_capacity_w", zone.cooling_capacity),
            ] {
                if !(value >= F::zero()) {
                    return Err(BuildingError::NonPositive {
                        zone: zone.name.clone(),
                        field,
                        value: value.as_f64(),
                    });
                }
            }
        }
        for coupling in &self.couplings {
            let [a, b] = &coupling.zones;
            if a == b {
                return Err(BuildingError::SelfCoupling(a.clone()));
            }
            for name in [a, b] {
                if self.zone_index(name).is_none() {
                    return Err(BuildingError::UnknownZone(name.clone()));
                }
            }
            if !(coupling.resistance > F::zero()) {
                return Err(BuildingError::NonPositive {
                    zone: format!("{a}<->{b}"),
                    field: "resistance_c_per_w",
                    value: coupling.resistance.as_f64(),
                });
            }
        }
        Ok(())
    }

    pub fn zone_count(&self) -> usize {
        self.zones.len()
    }

    pub fn zone_index(&self, name: &str) -> Option<usize> {
        self.zones.iter().position(|z| z.name == name)
    }

    /// All zones at the configured initial temperature.
    pub fn initial_states(&self) -> Vec<ZoneState<F>> {
        vec![
            ZoneState {
                temp: self.initial_zone_temp,
            };
            self.zones.len()
        ]
    }

    /// Idealized proportional thermostat: power ramps linearly from zero at
    /// the setpoint to full capacity [`PROPORTIONAL_BAND_DEGC`] past it.
    /// With `heating < cooling` the two modes can never fire together.
    pub fn thermostat(zone: &ZoneParams<F>, temp: F, setpoints: Setpoints<F>) -> (F, F) {
        let band = F::of(PROPORTIONAL_BAND_DEGC);
        let heat = (zone.heating_capacity / band * (setpoints.heating - temp))
            .max(F::zero())
            .min(zone.heating_capacity);
        let cool = (zone.cooling_capacity / band * (temp - setpoints.cooling))
            .max(F::zero())
            .min(zone.cooling_capacity);
        (heat, cool)
    }

    /// Advances all zones by `dt_seconds` under the given outdoor conditions
    /// and setpoints. `states` and `setpoints` are indexed like
    /// [`Self::zones`]; `states` is updated in place.
    pub fn step(
        &self,
        states: &mut [ZoneState<F>],
        weather: &WeatherTick<F>,
        setpoints: &[Setpoints<F>],
        dt_seconds: F,
    ) -> StepPowers<F> {
        assert_eq!(states.len(), self.zones.len(), "one state per zone");
        assert_eq!(setpoints.len(), self.zones.len(), "one setpoint pair per zone");

        let old: Vec<F> = states.iter().map(|s| s.temp).collect();
        let gain_fraction = F::of(self.gain_schedule.fraction(weather.timestamp));
        let solar_flux =
            (weather.direct_solar + weather.diffuse_solar) * self.solar_absorptance;

        let mut net_flux: Vec<F> = self
            .zones
            .iter()
            .zip(&old)
            .map(|(zone, &temp)| {
                (weather.drybulb_temp - temp) / zone.envelope_resistance
                    + zone.internal_gain_peak * gain_fraction
                    + zone.solar_aperture * solar_flux
            })
            .collect();

        for coupling in &self.couplings {
            let a = self.zone_index(&coupling.zones[0]).expect("validated");
            let b = self.zone_index(&coupling.zones[1]).expect("validated");
            let flow = (old[b] - old[a]) / coupling.resistance;
            net_flux[a] += flow;
            net_flux[b] -= flow;
        }

        let mut zone_powers = Vec::with_capacity(self.zones.len());
        let mut total_electric = F::zero();
        for (i, zone) in self.zones.iter().enumerate() {
            let (heat, cool) = Self::thermostat(zone, old[i], setpoints[i]);
            let electric = heat / zone.heating_cop + cool / zone.cooling_cop;
            total_electric += electric;
            net_flux[i] += heat - cool;
            states[i].temp = old[i] + dt_seconds / zone.thermal_capacitance * net_flux[i];
            zone_powers.push(ZonePowers {
                heating_thermal: heat,
                cooling_thermal: cool,
                electric,
            });
        }

        StepPowers {
            zones: zone_powers,
            total_electric,
        }
    }
}

//! The control environment: episode lifecycle over one simulated year at a
//! 15-minute step, gym-style `reset`/`step`, normalized observations, and a
//! power/comfort penalty reward.

mod action;
mod obs;
mod reward;

pub use action::{clamp_action, Action, COOLING_SP_RANGE, HEATING_SP_RANGE, MIN_SETPOINT_GAP};
pub use obs::NormalizationTracker;
pub use reward::{compute_reward, ComfortSchedule, RewardConfig, StepInfo};

use std::path::PathBuf;

use chrono::{Datelike, NaiveDateTime, Timelike};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::building::{BuildingError, BuildingModel, Setpoints, StepPowers, ZoneState};
use crate::scalar::Scalar;
use crate::weather::{
    ou_perturb, parse_epw, synthesize_climate, ClimateName, ClimateProfile, OuParams,
    WeatherError, WeatherSeries, WeatherTick,
};

const SEED_TAG_SYNTH: u64 = 0x57;
const SEED_TAG_EPISODE_WEATHER: u64 = 0x0e;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("building {0:?} has no observation/action layout (supported: five_zone, two_zone_datacenter)")]
    UnsupportedBuilding(String),
    #[error(transparent)]
    Building(#[from] BuildingError),
    #[error(transparent)]
    Weather(#[from] WeatherError),
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
    #[error("action carries {got} setpoint pairs, environment needs {expected}")]
    ActionSize { expected: usize, got: usize },
    #[error("environment must be reset before stepping")]
    ResetRequired,
    #[error("episode is over; call reset before stepping again")]
    SteppedAfterDone,
    #[error("cannot read weather file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse environment config: {0}")]
    Parse(#[from] toml::de::Error),
}

/// The two buildings with defined observation and action layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildingKind {
    FiveZone,
    TwoZoneDatacenter,
}

impl BuildingKind {
    pub fn from_building_name(name: &str) -> Option<Self> {
        match name {
            "five_zone" => Some(BuildingKind::FiveZone),
            "two_zone_datacenter" => Some(BuildingKind::TwoZoneDatacenter),
            _ => None,
        }
    }

    pub fn building_name(self) -> &'static str {
        match self {
            BuildingKind::FiveZone => "five_zone",
            BuildingKind::TwoZoneDatacenter => "two_zone_datacenter",
        }
    }

    /// Length of the normalized observation vector: site weather, one block
    /// per observed zone, then facility power and calendar slots.
    pub fn observation_size(self) -> usize {
        obs::SITE_SLOTS + self.observed_zone_names().len() * obs::ZONE_BLOCK_SLOTS + obs::TAIL_SLOTS
    }

    /// Number of (heating, cooling) pairs an action must carry.
    pub fn action_pairs(self) -> usize {
        match self {
            BuildingKind::FiveZone => 1,
            BuildingKind::TwoZoneDatacenter => 2,
        }
    }

    pub fn default_comfort_schedule(self) -> ComfortSchedule {
        match self {
            BuildingKind::FiveZone => ComfortSchedule::SeasonalOffice,
            BuildingKind::TwoZoneDatacenter => ComfortSchedule::Datacenter,
        }
    }

    /// Zones whose temperatures appear in observations and in the comfort
    /// penalty, in observation order.
    pub fn observed_zone_names(self) -> &'static [&'static str] {
        match self {
            BuildingKind::FiveZone => &["core"],
            BuildingKind::TwoZoneDatacenter => &["west", "east"],
        }
    }

    /// Zone each action pair addresses, in action order. An empty name means
    /// the pair is broadcast to every zone.
    pub fn action_zone_names(self) -> &'static [&'static str] {
        match self {
            BuildingKind::FiveZone => &[""],
            BuildingKind::TwoZoneDatacenter => &["east", "west"],
        }
    }

    /// Head count in each observed zone at full occupancy.
    fn design_occupants(self) -> f64 {
        match self {
            BuildingKind::FiveZone => 10.0,
            BuildingKind::TwoZoneDatacenter => 2.0,
        }
    }
}

/// Comfort range active for `building` on `date`.
pub fn comfort_range_for<F: Scalar>(date: NaiveDateTime, building: BuildingKind) -> (F, F) {
    building.default_comfort_schedule().range_for(date)
}

/// Everything needed to build an environment, loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "F: Scalar"))]
pub struct EnvConfig<F> {
    /// Building preset name: `five_zone` or `two_zone_datacenter`.
    pub building: String,
    /// Synthetic climate, used unless `weather_file` is set.
    pub climate: ClimateName,
    /// Optional EPW file overriding the synthetic climate.
    pub weather_file: Option<PathBuf>,
    /// Re-draw an Ornstein-Uhlenbeck drybulb perturbation each episode.
    pub stochastic_weather: bool,
    /// Perturbation parameters, used when `stochastic_weather` is true.
    pub ou: OuParams<F>,
    /// Steps per episode; a full year at 15 minutes is 35040.
    pub episode_length_steps: usize,
    /// Simulation step, seconds.
    pub timestep_s: u32,
    /// Calendar day (1-365) on which episodes begin.
    pub episode_start_day_of_year: u32,
    pub reward: RewardConfig<F>,
    /// Master seed for weather synthesis and per-episode perturbations.
    pub seed: u64,
}

impl<F: Scalar> Default for EnvConfig<F> {
    fn default() -> Self {
        Self {
            building: "five_zone".into(),
            climate: ClimateName::Hot,
            weather_file: None,
            stochastic_weather: false,
            ou: OuParams::default(),
            episode_length_steps: 35040,
            timestep_s: 900,
            episode_start_day_of_year: 1,
            reward: RewardConfig::default(),
            seed: 42,
        }
    }
}

impl<F: Scalar> EnvConfig<F> {
    pub fn from_toml_str(text: &str) -> Result<Self, EnvError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if BuildingKind::from_building_name(&self.building).is_none() {
            return Err(EnvError::UnsupportedBuilding(self.building.clone()));
        }
        if self.episode_length_steps == 0 {
            return Err(EnvError::InvalidConfig(
                "episode_length_steps must be at least 1".into(),
            ));
        }
        if self.timestep_s == 0 {
            return Err(EnvError::InvalidConfig("timestep_s must be positive".into()));
        }
        if !(1..=365).contains(&self.episode_start_day_of_year) {
            return Err(EnvError::InvalidConfig(format!(
                "episode_start_day_of_year must lie in 1..=365, got {}",
                self.episode_start_day_of_year
            )));
        }
        self.reward.validate()?;
        Ok(())
    }
}

/// Gym-style HVAC control environment over the RC building surrogate.
pub struct HvacEnv<F> {
    config: EnvConfig<F>,
    kind: BuildingKind,
    building: BuildingModel<F>,
    schedule: ComfortSchedule,
    /// Unperturbed weather at the simulation step.
    base_weather: WeatherSeries<F>,
    /// Weather in use for the current episode.
    weather: WeatherSeries<F>,
    tracker: NormalizationTracker<F>,
    states: Vec<ZoneState<F>>,
    /// Last applied setpoints, indexed like `building.zones`.
    setpoints: Vec<Setpoints<F>>,
    /// Zone indices each action pair addresses.
    action_map: Vec<Vec<usize>>,
    /// Zone indices observed and scored for comfort.
    observed_zones: Vec<usize>,
    start_index: usize,
    step_index: usize,
    episode_count: u64,
    last_powers: Option<StepPowers<F>>,
    initialized: bool,
    done: bool,
}

impl<F: Scalar> HvacEnv<F> {
    /// Builds an environment from config, loading the bundled building
    /// preset named by `config.building`.
    pub fn new(config: EnvConfig<F>) -> Result<Self, EnvError> {
        let building = crate::building::preset(&config.building)?;
        Self::with_building(config, building)
    }

    /// Builds an environment around an explicit building model. The model
    /// still must be one of the two supported kinds (by name) so that the
    /// observation and action layouts are defined.
    pub fn with_building(
        config: EnvConfig<F>,
        building: BuildingModel<F>,
    ) -> Result<Self, EnvError> {
        config.validate()?;
        let kind = BuildingKind::from_building_name(&config.building)
            .ok_or_else(|| EnvError::UnsupportedBuilding(config.building.clone()))?;

        let observed_zones = kind
            .observed_zone_names()
            .iter()
            .map(|name| {
                building
                    .zone_index(name)
                    .ok_or_else(|| BuildingError::UnknownZone(name.to_string()).into())
            })
            .collect::<Result<Vec<_>, EnvError>>()?;

        let action_map = kind
            .action_zone_names()
            .iter()
            .map(|name| {
                if name.is_empty() {
                    Ok((0..building.zone_count()).collect())
                } else {
                    building
                        .zone_index(name)
                        .map(|i| vec![i])
                        .ok_or_else(|| BuildingError::UnknownZone(name.to_string()).into())
                }
            })
            .collect::<Result<Vec<Vec<usize>>, EnvError>>()?;

        let base_weather = Self::load_weather(&config)?;
        if base_weather.len() < config.episode_length_steps.min(35040) && base_weather.len() < 96 {
            return Err(EnvError::InvalidConfig(format!(
                "weather series too short ({} ticks)",
                base_weather.len()
            )));
        }

        let mut bounds = obs::site_bounds::<F>();
        for _ in 0..observed_zones.len() {
            bounds.extend(obs::zone_block_bounds::<F>());
        }
        bounds.extend(obs::tail_bounds(Self::max_electric(&building)));
        debug_assert_eq!(bounds.len(), kind.observation_size());

        let schedule = config
            .reward
            .comfort_schedule
            .unwrap_or_else(|| kind.default_comfort_schedule());

        let start_index =
            ((config.episode_start_day_of_year as usize - 1) * 86_400 / config.timestep_s as usize)
                % base_weather.len();

        Ok(Self {
            kind,
            schedule,
            tracker: NormalizationTracker::new(&bounds),
            states: Vec::new(),
            setpoints: Vec::new(),
            action_map,
            observed_zones,
            start_index,
            step_index: 0,
            episode_count: 0,
            last_powers: None,
            initialized: false,
            done: false,
            weather: base_weather.clone(),
            base_weather,
            building,
            config,
        })
    }

    fn load_weather(config: &EnvConfig<F>) -> Result<WeatherSeries<F>, EnvError> {
        let series = match &config.weather_file {
            Some(path) => {
                let raw = std::fs::read(path).map_err(|source| EnvError::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_epw(&raw)?
            }
            None => synthesize_climate(
                &ClimateProfile::named(config.climate),
                crate::derive_seed(config.seed, SEED_TAG_SYNTH, 0),
            ),
        };
        if series.step_seconds != config.timestep_s {
            Ok(series.resample(config.timestep_s)?)
        } else {
            Ok(series)
        }
    }

    /// Theoretical peak electric draw, used to scale the power slot.
    fn max_electric(building: &BuildingModel<F>) -> F {
        building
            .zones
            .iter()
            .map(|z| z.heating_capacity / z.heating_cop + z.cooling_capacity / z.cooling_cop)
            .sum()
    }

    fn initial_setpoints(kind: BuildingKind) -> Setpoints<F> {
        match kind {
            BuildingKind::FiveZone => Setpoints {
                heating: F::of(20.0),
                cooling: F::of(23.5),
            },
            BuildingKind::TwoZoneDatacenter => Setpoints {
                heating: F::of(18.0),
                cooling: F::of(27.0),
            },
        }
    }

    /// Starts the next episode using the internal episode counter, so
    /// consecutive episodes see fresh weather draws under
    /// `stochastic_weather` while the run as a whole stays reproducible.
    pub fn reset(&mut self) -> Vec<F> {
        let episode = self.episode_count;
        self.reset_episode(episode)
    }

    /// Starts a specific episode index. The same `(config, episode)` always
    /// produces the same weather, temperatures, and observations.
    pub fn reset_episode(&mut self, episode: u64) -> Vec<F> {
        self.episode_count = episode + 1;
        self.weather = if self.config.stochastic_weather {
            let seed = crate::derive_seed(self.config.seed, SEED_TAG_EPISODE_WEATHER, episode);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ou_perturb(&self.base_weather, &self.config.ou, &mut rng)
        } else {
            self.base_weather.clone()
        };
        self.states = self.building.initial_states();
        self.setpoints = vec![Self::initial_setpoints(self.kind); self.building.zone_count()];
        self.step_index = 0;
        self.last_powers = None;
        self.initialized = true;
        self.done = false;
        self.tracker.reset();
        self.observe()
    }

    /// Applies one setpoint command and advances 15 simulated minutes (or
    /// the configured step). Returns the next normalized observation, the
    /// reward, whether the episode just ended, and the step diagnostics.
    pub fn step(
        &mut self,
        action: &Action<F>,
    ) -> Result<(Vec<F>, F, bool, StepInfo<F>), EnvError> {
        if !self.initialized {
            return Err(EnvError::ResetRequired);
        }
        if self.done {
            return Err(EnvError::SteppedAfterDone);
        }
        if action.pairs.len() != self.kind.action_pairs() {
            return Err(EnvError::ActionSize {
                expected: self.kind.action_pairs(),
                got: action.pairs.len(),
            });
        }

        let clamped = clamp_action(action);
        for (pair, zones) in clamped.pairs.iter().zip(&self.action_map) {
            for &z in zones {
                self.setpoints[z] = *pair;
            }
        }

        let tick = self.current_tick().clone();
        let powers = self.building.step(
            &mut self.states,
            &tick,
            &self.setpoints,
            F::of(self.config.timestep_s as f64),
        );

        self.step_index += 1;
        self.done = self.step_index >= self.config.episode_length_steps;

        let range = self.schedule.range_for(tick.timestamp);
        let temps: Vec<F> = self
            .observed_zones
            .iter()
            .map(|&z| self.states[z].temp)
            .collect();
        let (reward, info) =
            compute_reward(powers.total_electric, &temps, range, &self.config.reward);
        self.last_powers = Some(powers);

        Ok((self.observe(), reward, self.done, info))
    }

    /// Weather tick the next step will simulate under.
    pub fn current_tick(&self) -> &WeatherTick<F> {
        &self.weather.ticks[(self.start_index + self.step_index) % self.weather.len()]
    }

    fn observe(&mut self) -> Vec<F> {
        let tick = self.current_tick().clone();
        let when = tick.timestamp;
        let summer = (6..=9).contains(&when.month());
        let range = self.schedule.range_for::<F>(when);
        let occupants = F::of(
            self.kind.design_occupants() * self.building.gain_schedule.fraction(when),
        );

        let mut raw: Vec<F> = Vec::with_capacity(self.kind.observation_size());
        raw.push(tick.drybulb_temp);
        raw.push(tick.relative_humidity);
        raw.push(tick.wind_speed);
        raw.push(tick.wind_direction);
        raw.push(tick.diffuse_solar);
        raw.push(tick.direct_solar);

        for &z in &self.observed_zones {
            let temp = self.states[z].temp;
            let dev = (temp - range.1).max(F::zero()) + (range.0 - temp).max(F::zero());
            obs::push_zone_block(
                &mut raw,
                &obs::ZoneBlockInput {
                    heating_sp: self.setpoints[z].heating,
                    cooling_sp: self.setpoints[z].cooling,
                    temp,
                    outdoor_rh: tick.relative_humidity,
                    comfort_dev: dev,
                    summer,
                    occupants,
                },
            );
        }

        raw.push(
            self.last_powers
                .as_ref()
                .map(|p| p.total_electric)
                .unwrap_or_else(F::zero),
        );
        raw.push(F::of(when.year() as f64));
        raw.push(F::of(when.month() as f64));
        raw.push(F::of(when.day() as f64));
        raw.push(F::of(when.hour() as f64));

        self.tracker.normalize(&raw)
    }

    pub fn config(&self) -> &EnvConfig<F> {
        &self.config
    }

    pub fn kind(&self) -> BuildingKind {
        self.kind
    }

    pub fn building(&self) -> &BuildingModel<F> {
        &self.building
    }

    pub fn observation_size(&self) -> usize {
        self.kind.observation_size()
    }

    /// Scalar action dimension agents must emit (2 per pair).
    pub fn action_dim(&self) -> usize {
        self.kind.action_pairs() * 2
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Temperatures of every building zone, in building order.
    pub fn zone_temps(&self) -> Vec<F> {
        self.states.iter().map(|s| s.temp).collect()
    }

    /// Temperatures of the observed (comfort-scored) zones, in observation
    /// order.
    pub fn observed_zone_temps(&self) -> Vec<F> {
        self.observed_zones
            .iter()
            .map(|&z| self.states[z].temp)
            .collect()
    }

    /// Names of the observed zones, in observation order.
    pub fn observed_zone_names(&self) -> &'static [&'static str] {
        self.kind.observed_zone_names()
    }

    /// Setpoints currently applied to the observed zones, in observation
    /// order.
    pub fn observed_zone_setpoints(&self) -> Vec<Setpoints<F>> {
        self.observed_zones
            .iter()
            .map(|&z| self.setpoints[z])
            .collect()
    }

    /// Current observation normalization bounds as (mins, maxs).
    pub fn normalization_bounds(&self) -> (Vec<F>, Vec<F>) {
        let bounds = self.tracker.bounds();
        (
            bounds.iter().map(|b| b.0).collect(),
            bounds.iter().map(|b| b.1).collect(),
        )
    }

    /// Replaces the observation normalization bounds, e.g. with the bounds
    /// a policy checkpoint was trained under. The tracker keeps widening
    /// from these values if later observations fall outside them.
    pub fn set_normalization_bounds(&mut self, mins: &[F], maxs: &[F]) -> Result<(), EnvError> {
        let expected = self.observation_size();
        if mins.len() != expected || maxs.len() != expected {
            return Err(EnvError::InvalidConfig(format!(
                "normalization bounds need {expected} entries, got {} mins and {} maxs",
                mins.len(),
                maxs.len()
            )));
        }
        let bounds: Vec<(F, F)> = mins.iter().copied().zip(maxs.iter().copied()).collect();
        self.tracker.set_bounds(&bounds);
        Ok(())
    }

    /// Last applied setpoints, in building zone order.
    pub fn applied_setpoints(&self) -> &[Setpoints<F>] {
        &self.setpoints
    }

    /// Per-zone power of the last step, if any step has run this episode.
    pub fn last_step_powers(&self) -> Option<&StepPowers<F>> {
        self.last_powers.as_ref()
    }

    /// Timestamp of the upcoming step.
    pub fn current_timestamp(&self) -> NaiveDateTime {
        self.current_tick().timestamp
    }

    /// Active comfort range for the upcoming step.
    pub fn active_comfort_range(&self) -> (F, F) {
        self.schedule.range_for(self.current_timestamp())
    }
}

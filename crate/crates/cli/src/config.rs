//! Run configuration: a TOML file with `[env]`, `[agent]`, and `[schedule]`
//! sections, each optional, merged with command-line overrides. Sections
//! that are present mean exactly what the library's deserialization says;
//! missing sections fall back to the desk-scale presets so the tool works
//! without any file at all.

use std::path::Path;

use serde::Deserialize;
use thermoarena::drl::Algorithm;
use thermoarena::env::BuildingKind;
use thermoarena::experiments::{desk_agent, desk_env};
use thermoarena::weather::ClimateName;
use thermoarena::{AgentConfig, EnvConfig, TrainSchedule};

use crate::CliError;

/// Raw file contents before overrides are applied.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub env: Option<EnvConfig>,
    pub agent: Option<AgentConfig>,
    pub schedule: Option<TrainSchedule>,
}

/// Command-line overrides that feed into resolution.
#[derive(Debug, Default)]
pub struct Overrides {
    pub building: Option<String>,
    pub climate: Option<String>,
    pub algo: Option<String>,
    pub seed: Option<u64>,
    pub episodes: Option<usize>,
}

/// A fully determined run: every protocol consumes exactly these three
/// pieces.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub env: EnvConfig,
    pub agent: AgentConfig,
    pub schedule: TrainSchedule,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

fn parse_building(name: &str) -> Result<BuildingKind, CliError> {
    BuildingKind::from_building_name(name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown building {name:?}; expected five_zone or two_zone_datacenter"
        ))
    })
}

fn parse_climate(name: &str) -> Result<ClimateName, CliError> {
    name.parse()
        .map_err(|e| CliError::Config(format!("invalid --climate: {e}")))
}

fn parse_algo(name: &str) -> Result<Algorithm, CliError> {
    name.parse()
        .map_err(|e| CliError::Config(format!("invalid --algo: {e}")))
}

/// Merges a loaded file with flag overrides and validates the result.
///
/// `--building` and `--climate` rewrite plain fields and thus always apply.
/// `--algo` selects the desk agent preset when the file has no `[agent]`
/// section; a section with a different `algorithm` is a contradiction (its
/// other hyperparameters are tied to that algorithm), so that is an error.
/// `--seed` rebases both the schedule and environment seeds.
pub fn resolve(file: FileConfig, ov: &Overrides) -> Result<Resolved, CliError> {
    let mut env = match file.env {
        Some(env) => env,
        None => {
            let kind = match &ov.building {
                Some(name) => parse_building(name)?,
                None => BuildingKind::FiveZone,
            };
            let climate = match &ov.climate {
                Some(name) => parse_climate(name)?,
                None => ClimateName::Hot,
            };
            desk_env(kind, climate)
        }
    };
    if let Some(name) = &ov.building {
        env.building = parse_building(name)?.building_name().to_string();
    }
    if let Some(name) = &ov.climate {
        env.climate = parse_climate(name)?;
    }

    let agent = match (file.agent, &ov.algo) {
        (Some(agent), Some(name)) => {
            let requested = parse_algo(name)?;
            if agent.algorithm != requested {
                return Err(CliError::Config(format!(
                    "--algo {requested} conflicts with agent.algorithm = {} in the config file",
                    agent.algorithm
                )));
            }
            agent
        }
        (Some(agent), None) => agent,
        (None, algo) => {
            let algorithm = match algo {
                Some(name) => parse_algo(name)?,
                None => Algorithm::Sac,
            };
            desk_agent(algorithm)
        }
    };

    let mut schedule = file.schedule.unwrap_or_default();
    if let Some(seed) = ov.seed {
        schedule.seed = seed;
        env.seed = seed;
    }
    if let Some(n) = ov.episodes {
        schedule.n_train_episodes = n;
        // A shortened run still gets a final checkpoint.
        schedule.eval_frequency = schedule.eval_frequency.min(n);
    }

    env.validate().map_err(|e| CliError::Config(e.to_string()))?;
    agent.validate().map_err(|e| CliError::Config(e.to_string()))?;
    schedule
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    Ok(Resolved {
        env,
        agent,
        schedule,
    })
}

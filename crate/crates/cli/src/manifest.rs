//! Run manifests: a JSON snapshot of everything a protocol invocation needs,
//! written into the run directory before the run starts and finalized when
//! it ends. Re-running a protocol from its manifest reproduces the run's
//! metrics and checkpoints byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thermoarena::{AgentConfig, EnvConfig, TrainSchedule};

use crate::CliError;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn tool_version() -> String {
    format!("thermoarena {}", env!("CARGO_PKG_VERSION"))
}

/// Everything the run consumed, resolved. Protocol-specific knobs are
/// optional and present only where they apply.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSnapshot {
    pub env: EnvConfig,
    pub agent: AgentConfig,
    pub schedule: TrainSchedule,
    /// Curriculum climate order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
    /// Curriculum: keep replay experience across phases.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carry_buffer: Option<bool>,
    /// Curriculum: episodes per phase when not the schedule default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episodes_per_phase: Option<usize>,
    /// Trade-off sweep comfort weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
    /// Evaluation runs only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalSnapshot>,
}

impl ConfigSnapshot {
    pub fn new(env: EnvConfig, agent: AgentConfig, schedule: TrainSchedule) -> Self {
        Self {
            env,
            agent,
            schedule,
            order: None,
            carry_buffer: None,
            episodes_per_phase: None,
            omegas: None,
            eval: None,
        }
    }
}

/// How an evaluation run drove the environment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSnapshot {
    /// `policy`, `rbc`, or `random`.
    pub actor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    pub episodes: usize,
    pub trace: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool: String,
    pub run_id: String,
    pub protocol: String,
    pub seed: u64,
    pub started_utc: String,
    pub finished_utc: Option<String>,
    /// `running`, then `complete` or `failed`.
    pub status: String,
    pub config: ConfigSnapshot,
    /// Artifact name to path relative to the run directory.
    pub artifacts: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn begin(run_id: &str, protocol: &str, config: ConfigSnapshot) -> Self {
        Self {
            manifest_version: MANIFEST_VERSION,
            tool: tool_version(),
            run_id: run_id.to_string(),
            protocol: protocol.to_string(),
            seed: config.schedule.seed,
            started_utc: now_utc(),
            finished_utc: None,
            status: "running".to_string(),
            config,
            artifacts: BTreeMap::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(dir.join(MANIFEST_FILE), text)
    }

    pub fn finalize(&mut self, dir: &Path, status: &str) -> io::Result<()> {
        self.status = status.to_string();
        self.finished_utc = Some(now_utc());
        self.write(dir)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        let manifest: Self = serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!("invalid manifest {}: {e}", path.display()))
        })?;
        if manifest.manifest_version != MANIFEST_VERSION {
            return Err(CliError::Config(format!(
                "manifest {} has version {}, this tool reads version {}",
                path.display(),
                manifest.manifest_version,
                MANIFEST_VERSION
            )));
        }
        Ok(manifest)
    }
}

fn now_utc() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Claims a fresh directory for `run_id` under `root`. Earlier runs are
/// never overwritten: when the plain name is taken the next attempt gets a
/// `-r2`, `-r3`, ... suffix.
pub fn claim_run_dir(root: &Path, run_id: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(root)?;
    for attempt in 1u32.. {
        let name = if attempt == 1 {
            run_id.to_string()
        } else {
            format!("{run_id}-r{attempt}")
        };
        let dir = root.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e),
        }
    }
    unreachable!("run directory attempts are unbounded")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_dirs_are_never_reused() {
        let root = tempfile::tempdir().unwrap();
        let a = claim_run_dir(root.path(), "run").unwrap();
        let b = claim_run_dir(root.path(), "run").unwrap();
        let c = claim_run_dir(root.path(), "run").unwrap();
        assert_eq!(a.file_name().unwrap(), "run");
        assert_eq!(b.file_name().unwrap(), "run-r2");
        assert_eq!(c.file_name().unwrap(), "run-r3");
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let snap = ConfigSnapshot::new(
            EnvConfig::default(),
            AgentConfig::defaults(thermoarena::drl::Algorithm::Sac),
            TrainSchedule::default(),
        );
        let mut manifest = RunManifest::begin("r", "train", snap);
        manifest.artifacts.insert("metrics".into(), "metrics.csv".into());
        let dir = tempfile::tempdir().unwrap();
        manifest.write(dir.path()).unwrap();
        let loaded = RunManifest::load(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(loaded.run_id, "r");
        assert_eq!(loaded.status, "running");
        assert_eq!(loaded.config.env, manifest.config.env);
        assert_eq!(loaded.config.agent, manifest.config.agent);
        assert_eq!(loaded.artifacts["metrics"], "metrics.csv");
    }
}

//! Protocol commands: each one claims a fresh run directory, writes the
//! manifest up front, runs the protocol, writes CSV and checkpoint
//! artifacts, and finalizes the manifest. Everything except the manifest's
//! timestamps is a pure function of the configuration snapshot, so reruns
//! produce byte-identical artifacts.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use thermoarena::drl::Algorithm;
use thermoarena::experiments::io::{
    checkpoints_csv, crosseval_csv, metrics_csv, trace_csv, tradeoff_csv,
};
use thermoarena::experiments::{
    cross_evaluate, curriculum_train, evaluate, run_id, tradeoff_sweep, train,
    CurriculumOptions, EvalActor, ExperimentError, PhaseLog, TrainingLog,
};
use thermoarena::weather::ClimateName;
use thermoarena::{HvacEnv, TrainedPolicy};

use crate::manifest::{claim_run_dir, ConfigSnapshot, RunManifest};
use crate::CliError;

pub struct Ctx {
    pub out_root: PathBuf,
    pub quiet: bool,
}

impl Ctx {
    fn say(&self, line: &str) {
        if !self.quiet {
            println!("{line}");
        }
    }
}

/// A claimed run directory with its live manifest and log.
struct ActiveRun {
    dir: PathBuf,
    manifest: RunManifest,
}

impl ActiveRun {
    fn begin(
        ctx: &Ctx,
        run_id: &str,
        protocol: &str,
        snap: ConfigSnapshot,
    ) -> Result<Self, CliError> {
        let dir = claim_run_dir(&ctx.out_root, run_id).map_err(|e| {
            CliError::Runtime(format!(
                "cannot create run directory under {}: {e}",
                ctx.out_root.display()
            ))
        })?;
        let manifest = RunManifest::begin(run_id, protocol, snap);
        let run = Self { dir, manifest };
        run.write_manifest()?;
        run.log(&format!("run {run_id}"))?;
        run.log(&format!("protocol {protocol}"))?;
        Ok(run)
    }

    fn write_manifest(&self) -> Result<(), CliError> {
        self.manifest
            .write(&self.dir)
            .map_err(|e| CliError::Runtime(format!("cannot write manifest: {e}")))
    }

    /// Appends one line to the run log. Lines carry no timestamps, so the
    /// log is as reproducible as the CSV artifacts.
    fn log(&self, line: &str) -> Result<(), CliError> {
        let path = self.dir.join("run.log");
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", path.display())))?;
        writeln!(file, "{line}")
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
    }

    /// Writes a text artifact and records it in the manifest.
    fn artifact(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.manifest.artifacts.insert(name.to_string(), name.to_string());
        Ok(())
    }

    /// Saves a policy checkpoint and records it in the manifest.
    fn checkpoint(&mut self, name: &str, policy: &TrainedPolicy) -> Result<(), CliError> {
        let path = self.dir.join(name);
        policy
            .save(&path)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.manifest.artifacts.insert(name.to_string(), name.to_string());
        Ok(())
    }

    fn complete(mut self, ctx: &Ctx) -> Result<(), CliError> {
        self.log("status complete")?;
        self.manifest
            .finalize(&self.dir, "complete")
            .map_err(|e| CliError::Runtime(format!("cannot finalize manifest: {e}")))?;
        ctx.say(&format!("artifacts in {}", self.dir.display()));
        println!("{}", self.dir.display());
        Ok(())
    }

    fn fail(mut self, msg: String) -> Result<(), CliError> {
        let _ = self.log(&format!("status failed: {msg}"));
        let _ = self.manifest.finalize(&self.dir, "failed");
        Err(CliError::Runtime(msg))
    }

    fn log_training(&self, log: &TrainingLog<f64>) -> Result<(), CliError> {
        for phase in &log.phases {
            for (i, e) in phase.episodes.iter().enumerate() {
                self.log(&format!(
                    "phase {} episode {} mean_reward {}",
                    phase.phase,
                    i + 1,
                    e.mean_reward
                ))?;
            }
            for c in &phase.checkpoints {
                self.log(&format!(
                    "phase {} checkpoint after episode {} eval {}{}",
                    phase.phase,
                    c.after_episode,
                    c.mean_eval_reward,
                    if c.retained { " retained" } else { "" }
                ))?;
            }
        }
        Ok(())
    }
}

fn exp_msg(e: ExperimentError) -> String {
    e.to_string()
}

pub fn cmd_train(ctx: &Ctx, snap: ConfigSnapshot) -> Result<(), CliError> {
    let rid = run_id(
        "train",
        &snap.env.building,
        snap.env.climate,
        snap.agent.algorithm,
        snap.schedule.seed,
    );
    let mut run = ActiveRun::begin(ctx, &rid, "train", snap.clone())?;
    let outcome = match train(&snap.env, &snap.agent, &snap.schedule) {
        Ok(o) => o,
        Err(e) => return run.fail(exp_msg(e)),
    };
    run.artifact("metrics.csv", &metrics_csv(&outcome.log))?;
    run.artifact("checkpoints.csv", &checkpoints_csv(&outcome.log))?;
    run.checkpoint("best.json", &outcome.best_policy)?;
    run.checkpoint("final.json", &outcome.final_policy)?;
    run.log_training(&outcome.log)?;
    run.log(&format!("best eval reward {}", outcome.best_eval_reward))?;
    ctx.say(&format!(
        "run {rid}: best eval reward {:.4} over {} episodes",
        outcome.best_eval_reward, snap.schedule.n_train_episodes
    ));
    run.complete(ctx)
}

/// Which controller an evaluation run drives; parsed from `--actor`.
pub enum EvalDriver {
    Policy(Box<TrainedPolicy>),
    Rbc,
    Random,
}

pub fn cmd_eval(ctx: &Ctx, mut snap: ConfigSnapshot, driver: EvalDriver) -> Result<(), CliError> {
    let spec = snap.eval.clone().expect("eval snapshot is set by the caller");
    let mut env = HvacEnv::new(snap.env.clone())
        .map_err(|e| CliError::Config(format!("cannot build environment: {e}")))?;
    let label = match &driver {
        EvalDriver::Policy(p) => {
            if p.obs_dim != env.observation_size() || p.action_dim != env.action_dim() {
                return Err(CliError::Config(format!(
                    "checkpoint was trained for {} observation and {} action slots, but \
                     building {} has {} and {}; evaluate it on the building it was trained on",
                    p.obs_dim,
                    p.action_dim,
                    snap.env.building,
                    env.observation_size(),
                    env.action_dim()
                )));
            }
            snap.agent = p.agent_config.clone();
            p.algorithm.to_string()
        }
        EvalDriver::Rbc => "rbc".to_string(),
        EvalDriver::Random => "random".to_string(),
    };
    let rid = format!(
        "eval-{}-{}-{}-s{}",
        snap.env.building, snap.env.climate, label, snap.schedule.seed
    );
    let mut run = ActiveRun::begin(ctx, &rid, "eval", snap.clone())?;
    let actor = match &driver {
        EvalDriver::Policy(p) => EvalActor::Policy(p.as_ref()),
        EvalDriver::Rbc => EvalActor::RuleBased,
        EvalDriver::Random => EvalActor::Random(snap.schedule.seed),
    };
    let (summary, trace) = match evaluate(&mut env, actor, spec.episodes, spec.trace) {
        Ok(r) => r,
        Err(e) => return run.fail(exp_msg(e)),
    };
    let log = TrainingLog {
        run_id: rid.clone(),
        phases: vec![PhaseLog {
            phase: "eval".to_string(),
            episodes: summary.episodes.clone(),
            checkpoints: vec![],
        }],
    };
    run.artifact("metrics.csv", &metrics_csv(&log))?;
    if spec.trace {
        run.artifact("trace.csv", &trace_csv(&trace))?;
    }
    run.log(&format!(
        "mean reward {} over {} episodes",
        summary.mean_episode_reward, spec.episodes
    ))?;
    run.log(&format!(
        "mean power {} W, comfort violations {}% of steps, mean depth {} degC",
        summary.mean_power_w, summary.comfort_violation_pct, summary.mean_violation_degc
    ))?;
    ctx.say(&format!(
        "run {rid}: mean reward {:.4}, mean power {:.0} W, violations {:.1}%",
        summary.mean_episode_reward, summary.mean_power_w, summary.comfort_violation_pct
    ));
    run.complete(ctx)
}

pub fn cmd_crosseval(ctx: &Ctx, snap: ConfigSnapshot) -> Result<(), CliError> {
    let rid = format!(
        "crosseval-{}-{}-s{}",
        snap.env.building, snap.agent.algorithm, snap.schedule.seed
    );
    let mut run = ActiveRun::begin(ctx, &rid, "crosseval", snap.clone())?;
    let matrix = match cross_evaluate(&snap.env, &snap.agent, &snap.schedule) {
        Ok(m) => m,
        Err(e) => return run.fail(exp_msg(e)),
    };
    run.artifact("crosseval.csv", &crosseval_csv(&matrix))?;
    for cell in &matrix.cells {
        run.log(&format!(
            "trained on {} evaluated on {}: mean reward {}",
            cell.train_climate, cell.eval_climate, cell.summary.mean_episode_reward
        ))?;
    }
    for (climate, summary) in &matrix.rbc_baselines {
        run.log(&format!(
            "rbc on {climate}: mean reward {}",
            summary.mean_episode_reward
        ))?;
    }
    ctx.say(&format!(
        "run {rid}: {} cells and {} baselines",
        matrix.cells.len(),
        matrix.rbc_baselines.len()
    ));
    run.complete(ctx)
}

pub fn cmd_curriculum(ctx: &Ctx, snap: ConfigSnapshot) -> Result<(), CliError> {
    let order = parse_order(snap.order.as_deref().unwrap_or_default())?;
    let opts = CurriculumOptions {
        carry_buffer: snap.carry_buffer.unwrap_or(true),
        episodes_per_phase: snap.episodes_per_phase,
    };
    let last = order.last().expect("order was checked to be non-empty");
    let rid = format!(
        "curriculum-{}-{}-{}-s{}",
        snap.env.building, last, snap.agent.algorithm, snap.schedule.seed
    );
    let mut run = ActiveRun::begin(ctx, &rid, "curriculum", snap.clone())?;
    let outcome = match curriculum_train(&snap.env, &snap.agent, &order, &snap.schedule, &opts) {
        Ok(o) => o,
        Err(e) => return run.fail(exp_msg(e)),
    };
    run.artifact("metrics.csv", &metrics_csv(&outcome.log))?;
    run.artifact("checkpoints.csv", &checkpoints_csv(&outcome.log))?;
    run.checkpoint("best.json", &outcome.best_policy)?;
    run.checkpoint("final.json", &outcome.final_policy)?;
    run.log_training(&outcome.log)?;
    run.log(&format!("best eval reward {}", outcome.best_eval_reward))?;
    ctx.say(&format!(
        "run {rid}: best eval reward {:.4} after phases {}",
        outcome.best_eval_reward,
        order
            .iter()
            .map(|c| c.as_str())
            .collect::<Vec<_>>()
            .join(",")
    ));
    run.complete(ctx)
}

pub fn cmd_tradeoff(ctx: &Ctx, snap: ConfigSnapshot) -> Result<(), CliError> {
    let omegas = snap.omegas.clone().expect("omegas are set by the caller");
    let rid = format!(
        "tradeoff-{}-{}-{}-s{}",
        snap.env.building, snap.env.climate, snap.agent.algorithm, snap.schedule.seed
    );
    let mut run = ActiveRun::begin(ctx, &rid, "tradeoff", snap.clone())?;
    let results = match tradeoff_sweep(&snap.env, &snap.agent, &omegas, &snap.schedule) {
        Ok(r) => r,
        Err(e) => return run.fail(exp_msg(e)),
    };
    run.artifact("tradeoff.csv", &tradeoff_csv(&results))?;
    for r in &results {
        run.artifact(
            &format!("metrics-w{}.csv", r.omega),
            &metrics_csv(&r.outcome.log),
        )?;
        run.checkpoint(&format!("best-w{}.json", r.omega), &r.outcome.best_policy)?;
        run.log(&format!(
            "omega {}: mean reward {}, violations {}% of steps",
            r.omega, r.summary.mean_episode_reward, r.summary.comfort_violation_pct
        ))?;
    }
    ctx.say(&format!("run {rid}: {} comfort weights", results.len()));
    run.complete(ctx)
}

pub fn cmd_presets() {
    println!("buildings:");
    for name in thermoarena::building::preset_names() {
        println!("  {name}");
    }
    println!("climates:");
    for climate in ClimateName::ALL {
        println!("  {climate}");
    }
    println!("algorithms:");
    for algorithm in Algorithm::ALL {
        println!("  {algorithm}");
    }
    println!("desk episode: 672 steps (one week at 15 minutes)");
}

pub fn parse_order(names: &[String]) -> Result<Vec<ClimateName>, CliError> {
    if names.is_empty() {
        return Err(CliError::Config(
            "curriculum needs at least one climate in --order".into(),
        ));
    }
    names
        .iter()
        .map(|name| {
            name.parse()
                .map_err(|e| CliError::Config(format!("invalid --order entry: {e}")))
        })
        .collect()
}

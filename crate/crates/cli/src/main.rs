//! `thermoarena`: train, evaluate, and chart HVAC setpoint agents on the
//! bundled thermal surrogate. Every protocol run gets its own directory
//! under the output root with a manifest, CSV metrics, and checkpoints;
//! `plot` turns those CSVs into standalone SVG charts.
//!
//! Exit codes: 2 for invalid configuration or inputs, 1 for failures while
//! running, 0 on success.

mod commands;
mod config;
mod manifest;
mod plot;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thermoarena::TrainedPolicy;

use commands::{Ctx, EvalDriver};
use config::{FileConfig, Overrides};
use manifest::{ConfigSnapshot, EvalSnapshot, RunManifest};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or inputs; exits with code 2.
    Config(String),
    /// A failure while running; exits with code 1.
    Runtime(String),
}

#[derive(Parser)]
#[command(
    name = "thermoarena",
    version,
    about = "Desk-scale HVAC control benchmark: train and evaluate setpoint agents on a thermal surrogate"
)]
struct Cli {
    /// TOML run configuration with optional [env], [agent], and [schedule]
    /// sections; missing sections use the desk-scale presets
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Root directory for run outputs (default: $THERMOARENA_OUT or ./runs)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Base seed for the run; overrides the schedule and environment seeds
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Suppress console progress; run.log still records it
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one agent, keeping the best evaluation checkpoint
    Train(ProtocolArgs),
    /// Evaluate a checkpoint or a baseline controller
    Eval(EvalArgs),
    /// Train one agent per climate and evaluate every policy on every climate
    Crosseval(ProtocolArgs),
    /// Train one agent through a sequence of climates
    Curriculum(CurriculumArgs),
    /// Train at several comfort weights and tabulate the power/comfort trade-off
    Tradeoff(TradeoffArgs),
    /// Render metrics, cross-evaluation, trace, or trade-off CSVs to SVG
    Plot(PlotArgs),
    /// List the bundled buildings, climates, and algorithms
    Presets,
}

#[derive(Args)]
struct ProtocolArgs {
    /// Training episodes (overrides schedule.n_train_episodes)
    #[arg(long, value_name = "N")]
    episodes: Option<usize>,

    /// Agent algorithm (sac, td3, ppo) when the config has no [agent] section
    #[arg(long, value_name = "ALG")]
    algo: Option<String>,

    /// Building preset (five_zone, two_zone_datacenter)
    #[arg(long, value_name = "NAME")]
    building: Option<String>,

    /// Climate (cool, mixed, hot)
    #[arg(long, value_name = "NAME")]
    climate: Option<String>,

    /// Re-run exactly the configuration recorded in a manifest
    #[arg(long, value_name = "FILE")]
    from_manifest: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Policy checkpoint to evaluate
    #[arg(long, value_name = "FILE")]
    checkpoint: Option<PathBuf>,

    /// What drives the setpoints: policy, rbc, or random
    #[arg(long, value_name = "WHO")]
    actor: Option<String>,

    /// Evaluation episodes (default: schedule.eval_length)
    #[arg(long, value_name = "N")]
    episodes: Option<usize>,

    /// Also write a step-level trace.csv of the first episode
    #[arg(long)]
    trace: bool,

    /// Building preset (five_zone, two_zone_datacenter)
    #[arg(long, value_name = "NAME")]
    building: Option<String>,

    /// Climate (cool, mixed, hot)
    #[arg(long, value_name = "NAME")]
    climate: Option<String>,

    /// Re-run exactly the configuration recorded in a manifest
    #[arg(long, value_name = "FILE")]
    from_manifest: Option<PathBuf>,
}

#[derive(Args)]
struct CurriculumArgs {
    #[command(flatten)]
    base: ProtocolArgs,

    /// Comma-separated climate order, e.g. cool,mixed,hot
    #[arg(long, value_name = "LIST", default_value = "cool,mixed,hot")]
    order: String,

    /// Keep replay experience across phase boundaries
    #[arg(long, value_name = "BOOL")]
    carry_buffer: Option<bool>,

    /// Training episodes per phase (default: schedule.n_train_episodes)
    #[arg(long, value_name = "N")]
    episodes_per_phase: Option<usize>,
}

#[derive(Args)]
struct TradeoffArgs {
    #[command(flatten)]
    base: ProtocolArgs,

    /// Comma-separated comfort weights in [0, 1]
    #[arg(long, value_name = "LIST", default_value = "0.25,0.5,0.75")]
    omegas: String,
}

#[derive(Args)]
struct PlotArgs {
    /// CSV artifact to render; repeatable. The chart type is inferred from
    /// the header row
    #[arg(long, value_name = "FILE", required = true)]
    input: Vec<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out_root = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("THERMOARENA_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"));
    let ctx = Ctx {
        out_root,
        quiet: cli.quiet,
    };
    match &cli.command {
        Cmd::Train(args) => {
            let snap = protocol_snapshot(&cli, args, "train")?;
            commands::cmd_train(&ctx, snap)
        }
        Cmd::Eval(args) => {
            let (snap, driver) = eval_snapshot(&cli, args)?;
            commands::cmd_eval(&ctx, snap, driver)
        }
        Cmd::Crosseval(args) => {
            let snap = protocol_snapshot(&cli, args, "crosseval")?;
            commands::cmd_crosseval(&ctx, snap)
        }
        Cmd::Curriculum(args) => {
            let mut snap = protocol_snapshot(&cli, &args.base, "curriculum")?;
            if snap.order.is_none() {
                let names: Vec<String> = args.order.split(',').map(str::to_string).collect();
                let parsed = commands::parse_order(&names)?;
                snap.order = Some(parsed.iter().map(|c| c.as_str().to_string()).collect());
                snap.carry_buffer = Some(args.carry_buffer.unwrap_or(true));
                snap.episodes_per_phase = args.episodes_per_phase;
            }
            commands::cmd_curriculum(&ctx, snap)
        }
        Cmd::Tradeoff(args) => {
            let mut snap = protocol_snapshot(&cli, &args.base, "tradeoff")?;
            if snap.omegas.is_none() {
                snap.omegas = Some(parse_omegas(&args.omegas)?);
            }
            commands::cmd_tradeoff(&ctx, snap)
        }
        Cmd::Plot(args) => plot::cmd_plot(&ctx, &args.input),
        Cmd::Presets => {
            commands::cmd_presets();
            Ok(())
        }
    }
}

/// Builds the configuration snapshot for a protocol command, either from a
/// manifest (which then stands alone) or from the config file plus flags.
fn protocol_snapshot(
    cli: &Cli,
    args: &ProtocolArgs,
    protocol: &str,
) -> Result<ConfigSnapshot, CliError> {
    if let Some(path) = &args.from_manifest {
        if cli.config.is_some()
            || cli.seed.is_some()
            || args.episodes.is_some()
            || args.algo.is_some()
            || args.building.is_some()
            || args.climate.is_some()
        {
            return Err(CliError::Config(
                "--from-manifest replaces --config, --seed, --episodes, --algo, --building, \
                 and --climate; drop the conflicting flags"
                    .into(),
            ));
        }
        return manifest_snapshot(path, protocol);
    }
    let file = match &cli.config {
        Some(path) => config::load_file(path)?,
        None => FileConfig::default(),
    };
    let resolved = config::resolve(
        file,
        &Overrides {
            building: args.building.clone(),
            climate: args.climate.clone(),
            algo: args.algo.clone(),
            seed: cli.seed,
            episodes: args.episodes,
        },
    )?;
    Ok(ConfigSnapshot::new(
        resolved.env,
        resolved.agent,
        resolved.schedule,
    ))
}

fn manifest_snapshot(path: &PathBuf, protocol: &str) -> Result<ConfigSnapshot, CliError> {
    let m = RunManifest::load(path)?;
    if m.protocol != protocol {
        return Err(CliError::Config(format!(
            "manifest {} records a {} run; invoke `thermoarena {}` with it",
            path.display(),
            m.protocol,
            m.protocol
        )));
    }
    let snap = m.config;
    snap.env
        .validate()
        .map_err(|e| CliError::Config(format!("manifest env config: {e}")))?;
    snap.agent
        .validate()
        .map_err(|e| CliError::Config(format!("manifest agent config: {e}")))?;
    snap.schedule
        .validate()
        .map_err(|e| CliError::Config(format!("manifest schedule: {e}")))?;
    Ok(snap)
}

fn eval_snapshot(cli: &Cli, args: &EvalArgs) -> Result<(ConfigSnapshot, EvalDriver), CliError> {
    let snap = if let Some(path) = &args.from_manifest {
        if cli.config.is_some()
            || cli.seed.is_some()
            || args.checkpoint.is_some()
            || args.actor.is_some()
            || args.episodes.is_some()
            || args.trace
            || args.building.is_some()
            || args.climate.is_some()
        {
            return Err(CliError::Config(
                "--from-manifest replaces the other eval flags; drop the conflicting ones".into(),
            ));
        }
        let snap = manifest_snapshot(path, "eval")?;
        if snap.eval.is_none() {
            return Err(CliError::Config(format!(
                "manifest {} has no eval section",
                path.display()
            )));
        }
        snap
    } else {
        let file = match &cli.config {
            Some(path) => config::load_file(path)?,
            None => FileConfig::default(),
        };
        let resolved = config::resolve(
            file,
            &Overrides {
                building: args.building.clone(),
                climate: args.climate.clone(),
                algo: None,
                seed: cli.seed,
                episodes: None,
            },
        )?;
        let mut snap = ConfigSnapshot::new(resolved.env, resolved.agent, resolved.schedule);
        let actor = match (&args.actor, &args.checkpoint) {
            (Some(a), _) => a.clone(),
            (None, Some(_)) => "policy".to_string(),
            (None, None) => {
                return Err(CliError::Config(
                    "eval needs --checkpoint, or --actor rbc|random for a baseline".into(),
                ))
            }
        };
        snap.eval = Some(EvalSnapshot {
            actor,
            checkpoint: args.checkpoint.clone(),
            episodes: args.episodes.unwrap_or(snap.schedule.eval_length),
            trace: args.trace,
        });
        snap
    };
    let spec = snap.eval.clone().expect("eval snapshot was just set");
    let driver = match spec.actor.as_str() {
        "policy" => {
            let path = spec.checkpoint.as_ref().ok_or_else(|| {
                CliError::Config("--actor policy needs --checkpoint".into())
            })?;
            let policy = TrainedPolicy::load(path).map_err(|e| {
                CliError::Config(format!("cannot load checkpoint {}: {e}", path.display()))
            })?;
            EvalDriver::Policy(Box::new(policy))
        }
        "rbc" => EvalDriver::Rbc,
        "random" => EvalDriver::Random,
        other => {
            return Err(CliError::Config(format!(
                "unknown --actor {other:?}; expected policy, rbc, or random"
            )))
        }
    };
    Ok((snap, driver))
}

fn parse_omegas(list: &str) -> Result<Vec<f64>, CliError> {
    let mut omegas = Vec::new();
    for token in list.split(',') {
        let omega: f64 = token
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("invalid --omegas entry {token:?}")))?;
        if !(0.0..=1.0).contains(&omega) {
            return Err(CliError::Config(format!(
                "--omegas entries must lie in [0, 1], got {omega}"
            )));
        }
        omegas.push(omega);
    }
    if omegas.is_empty() {
        return Err(CliError::Config("--omegas needs at least one weight".into()));
    }
    Ok(omegas)
}

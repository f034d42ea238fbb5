//! Protocol implementations: single-run training with periodic evaluation
//! and best-checkpoint retention, policy/controller evaluation with optional
//! step traces, the 3x3 climate cross-evaluation, curriculum training, and
//! the comfort-weight sweep.

use chrono::NaiveDateTime;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controllers::{rbc_5zone, rbc_datacenter, RandomAgent, RbcState};
use crate::derive_seed;
use crate::drl::{Agent, Algorithm, TrainedPolicy};
use crate::drl::AgentConfig;
use crate::env::{Action, BuildingKind, EnvConfig, HvacEnv};
use crate::scalar::Scalar;
use crate::weather::ClimateName;

use super::{
    CheckpointRecord, EpisodeAccumulator, EpisodeMetrics, ExperimentError, MetricsSummary,
    PhaseLog, TrainSchedule, TrainingLog, SEED_TAG_AGENT, SEED_TAG_EVAL_ENV, SEED_TAG_TRAIN_ENV,
};

/// Evaluation-env seed salt shared by every column of the cross-evaluation
/// matrix, so each eval climate presents identical weather to all policies.
const CROSS_EVAL_SALT: u64 = 100;
/// Evaluation-env seed salt shared by every comfort weight in a sweep.
const TRADEOFF_EVAL_SALT: u64 = 1000;

/// What drives the environment during [`evaluate`].
pub enum EvalActor<'a, F> {
    /// A trained policy acting deterministically (its stored normalization
    /// bounds, if any, are installed in the environment first).
    Policy(&'a TrainedPolicy<F>),
    /// The building's rule-based controller.
    RuleBased,
    /// Uniform random setpoints from the given seed.
    Random(u64),
}

/// One observed zone's view of one evaluation step. `datetime`, `outdoor_c`,
/// and the comfort band describe the interval being simulated; temperatures,
/// setpoints, power, and reward are the results of simulating it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow<F> {
    pub step: usize,
    pub datetime: NaiveDateTime,
    pub outdoor_c: F,
    pub zone: &'static str,
    pub zone_temp_c: F,
    pub heating_sp: F,
    pub cooling_sp: F,
    pub power_w: F,
    pub reward: F,
    pub comfort_low: F,
    pub comfort_high: F,
}

/// Result of a training protocol: the best evaluation checkpoint, the final
/// weights, and the full per-episode log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Scalar"))]
pub struct TrainOutcome<F> {
    pub best_policy: TrainedPolicy<F>,
    pub final_policy: TrainedPolicy<F>,
    pub best_eval_reward: F,
    pub log: TrainingLog<F>,
}

/// One cell of the climate cross-evaluation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCell<F> {
    pub train_climate: ClimateName,
    pub eval_climate: ClimateName,
    pub summary: MetricsSummary<F>,
}

/// All nine train-climate x eval-climate cells (train-major order) plus a
/// rule-based baseline per evaluation climate, measured on the same weather.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossEvalMatrix<F> {
    pub cells: Vec<CrossCell<F>>,
    pub rbc_baselines: Vec<(ClimateName, MetricsSummary<F>)>,
}

impl<F: Scalar> CrossEvalMatrix<F> {
    /// Mean evaluation reward of the (train, eval) cell, if present.
    pub fn cell(&self, train: ClimateName, eval: ClimateName) -> Option<&MetricsSummary<F>> {
        self.cells
            .iter()
            .find(|c| c.train_climate == train && c.eval_climate == eval)
            .map(|c| &c.summary)
    }
}

/// Knobs for [`curriculum_train`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurriculumOptions {
    /// Keep replay experience across phase boundaries (off-policy agents
    /// then revisit earlier climates through the buffer).
    pub carry_buffer: bool,
    /// Training episodes per climate phase; defaults to the schedule's
    /// `n_train_episodes`.
    pub episodes_per_phase: Option<usize>,
}

impl Default for CurriculumOptions {
    fn default() -> Self {
        Self {
            carry_buffer: true,
            episodes_per_phase: None,
        }
    }
}

/// One comfort weight's result in a trade-off sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Scalar"))]
pub struct OmegaResult<F> {
    pub omega: F,
    pub outcome: TrainOutcome<F>,
    /// Final evaluation of the best policy on the sweep-shared weather.
    pub summary: MetricsSummary<F>,
}

/// Canonical identifier for a protocol run, stable across reruns.
pub fn run_id(
    protocol: &str,
    building: &str,
    climate: ClimateName,
    algorithm: Algorithm,
    seed: u64,
) -> String {
    format!("{protocol}-{building}-{climate}-{algorithm}-s{seed}")
}

fn make_env<F: Scalar>(
    base: &EnvConfig<F>,
    climate: Option<ClimateName>,
    seed: u64,
) -> Result<HvacEnv<F>, ExperimentError> {
    let mut cfg = base.clone();
    if let Some(c) = climate {
        cfg.climate = c;
    }
    cfg.seed = seed;
    Ok(HvacEnv::new(cfg)?)
}

enum Driver<F> {
    Policy(TrainedPolicy<F>, ChaCha8Rng),
    Rbc5,
    /// Controller state plus zone indices in controller action order.
    RbcDatacenter(RbcState<F>, Vec<usize>),
    Random(RandomAgent<F>),
}

/// Runs `n_episodes` evaluation episodes (indices 0..n, so repeated calls
/// see identical weather) and aggregates the reported metrics. With
/// `capture_trace` the first episode also yields one [`TraceRow`] per
/// observed zone per step.
pub fn evaluate<F: Scalar>(
    env: &mut HvacEnv<F>,
    actor: EvalActor<'_, F>,
    n_episodes: usize,
    capture_trace: bool,
) -> Result<(MetricsSummary<F>, Vec<TraceRow<F>>), ExperimentError> {
    if n_episodes == 0 {
        return Err(ExperimentError::Protocol(
            "evaluation needs at least one episode".into(),
        ));
    }
    let mut driver = match actor {
        EvalActor::Policy(p) => {
            if let Some((mins, maxs)) = &p.normalization_bounds {
                env.set_normalization_bounds(mins, maxs)?;
            }
            let rng = ChaCha8Rng::seed_from_u64(derive_seed(env.config().seed, SEED_TAG_EVAL_ENV, 0));
            Driver::Policy(p.clone(), rng)
        }
        EvalActor::RuleBased => match env.kind() {
            BuildingKind::FiveZone => Driver::Rbc5,
            BuildingKind::TwoZoneDatacenter => {
                let order = env
                    .kind()
                    .action_zone_names()
                    .iter()
                    .map(|name| {
                        env.building().zone_index(name).ok_or_else(|| {
                            ExperimentError::Protocol(format!(
                                "building {} lacks zone {name}",
                                env.building().name
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Driver::RbcDatacenter(RbcState::datacenter_default(), order)
            }
        },
        EvalActor::Random(seed) => Driver::Random(RandomAgent::new(seed, env.kind())),
    };

    let mut episodes = Vec::with_capacity(n_episodes);
    let mut trace = Vec::new();
    for ep in 0..n_episodes {
        let mut obs = env.reset_episode(ep as u64);
        if let Driver::RbcDatacenter(state, _) = &mut driver {
            *state = RbcState::datacenter_default();
        }
        let mut acc = EpisodeAccumulator::new();
        loop {
            let action = match &mut driver {
                Driver::Policy(policy, rng) => {
                    Action::from_squashed(&policy.act(&obs, true, rng)?)
                }
                Driver::Rbc5 => rbc_5zone(env.current_timestamp()),
                Driver::RbcDatacenter(state, order) => {
                    let temps = env.zone_temps();
                    let ordered: Vec<F> = order.iter().map(|&i| temps[i]).collect();
                    let (action, next_state) = rbc_datacenter(&ordered, state.clone());
                    *state = next_state;
                    action
                }
                Driver::Random(agent) => agent.next_action(),
            };
            let tracing = capture_trace && ep == 0;
            let (step, datetime, outdoor, comfort) = if tracing {
                (
                    env.step_index(),
                    env.current_timestamp(),
                    env.current_tick().drybulb_temp,
                    env.active_comfort_range(),
                )
            } else {
                (0, NaiveDateTime::default(), F::zero(), (F::zero(), F::zero()))
            };
            let (next_obs, reward, done, info) = env.step(&action)?;
            acc.push(reward, &info);
            if tracing {
                let temps = env.observed_zone_temps();
                let setpoints = env.observed_zone_setpoints();
                for (i, &zone) in env.observed_zone_names().iter().enumerate() {
                    trace.push(TraceRow {
                        step,
                        datetime,
                        outdoor_c: outdoor,
                        zone,
                        zone_temp_c: temps[i],
                        heating_sp: setpoints[i].heating,
                        cooling_sp: setpoints[i].cooling,
                        power_w: info.electric_power,
                        reward,
                        comfort_low: comfort.0,
                        comfort_high: comfort.1,
                    });
                }
            }
            obs = next_obs;
            if done {
                break;
            }
        }
        episodes.push(acc.finish());
    }
    Ok((MetricsSummary::from_episodes(episodes), trace))
}

/// Trains `agent` on `train_env` for `n_episodes`, checkpointing on
/// `eval_env` every `schedule.eval_frequency` episodes. Evaluation reuses
/// episode indices 0..eval_length each time, so checkpoint scores are
/// comparable; `best` keeps the highest-scoring snapshot (strictly-greater
/// replacement).
fn run_phase<F: Scalar>(
    agent: &mut Agent<F>,
    train_env: &mut HvacEnv<F>,
    eval_env: &mut HvacEnv<F>,
    schedule: &TrainSchedule,
    n_episodes: usize,
    phase: &str,
    best: &mut Option<(F, TrainedPolicy<F>)>,
) -> Result<PhaseLog<F>, ExperimentError> {
    let mut episodes: Vec<EpisodeMetrics<F>> = Vec::with_capacity(n_episodes);
    let mut checkpoints = Vec::new();
    for e in 0..n_episodes {
        let mut obs = train_env.reset_episode(e as u64);
        let mut acc = EpisodeAccumulator::new();
        loop {
            let units = agent.act_stochastic(&obs)?;
            let action = Action::from_squashed(&units);
            let (next_obs, reward, done, info) = train_env.step(&action)?;
            agent.record(&obs, &units, reward, &next_obs, done)?;
            acc.push(reward, &info);
            obs = next_obs;
            if done {
                break;
            }
        }
        episodes.push(acc.finish());

        if (e + 1) % schedule.eval_frequency == 0 {
            let policy = snapshot(agent, train_env);
            let (summary, _) =
                evaluate(eval_env, EvalActor::Policy(&policy), schedule.eval_length, false)?;
            let reward = summary.mean_episode_reward;
            let retained = best.as_ref().map_or(true, |(b, _)| reward > *b);
            if retained {
                *best = Some((reward, policy));
            }
            checkpoints.push(CheckpointRecord {
                after_episode: e + 1,
                mean_eval_reward: reward,
                retained,
            });
        }
    }
    Ok(PhaseLog {
        phase: phase.to_string(),
        episodes,
        checkpoints,
    })
}

/// Policy snapshot carrying the training env's current normalization bounds.
fn snapshot<F: Scalar>(agent: &Agent<F>, train_env: &HvacEnv<F>) -> TrainedPolicy<F> {
    let (mins, maxs) = train_env.normalization_bounds();
    agent.policy().with_normalization_bounds(mins, maxs)
}

fn train_cell<F: Scalar>(
    env_cfg: &EnvConfig<F>,
    agent_cfg: &AgentConfig<F>,
    schedule: &TrainSchedule,
    cell: u64,
    climate: Option<ClimateName>,
    protocol: &str,
) -> Result<TrainOutcome<F>, ExperimentError> {
    schedule.validate()?;
    let mut train_env = make_env(
        env_cfg,
        climate,
        derive_seed(schedule.seed, SEED_TAG_TRAIN_ENV, cell),
    )?;
    let mut eval_env = make_env(
        env_cfg,
        climate,
        derive_seed(schedule.seed, SEED_TAG_EVAL_ENV, cell),
    )?;
    let mut cfg = agent_cfg.clone();
    cfg.seed = derive_seed(schedule.seed, SEED_TAG_AGENT, cell);
    let mut agent = Agent::new(train_env.observation_size(), train_env.action_dim(), cfg)?;

    let mut best = None;
    let phase = run_phase(
        &mut agent,
        &mut train_env,
        &mut eval_env,
        schedule,
        schedule.n_train_episodes,
        "train",
        &mut best,
    )?;
    let final_policy = snapshot(&agent, &train_env);
    let (best_eval_reward, best_policy) = match best {
        Some((reward, policy)) => (reward, policy),
        // Unreachable for validated schedules (eval_frequency is capped by
        // n_train_episodes), kept as a safe fallback.
        None => {
            let (summary, _) = evaluate(
                &mut eval_env,
                EvalActor::Policy(&final_policy),
                schedule.eval_length,
                false,
            )?;
            (summary.mean_episode_reward, final_policy.clone())
        }
    };
    let id = run_id(
        protocol,
        train_env.kind().building_name(),
        train_env.config().climate,
        agent_cfg.algorithm,
        schedule.seed,
    );
    Ok(TrainOutcome {
        best_policy,
        final_policy,
        best_eval_reward,
        log: TrainingLog {
            run_id: id,
            phases: vec![phase],
        },
    })
}

/// Trains one agent on one environment per the schedule, returning the best
/// evaluation checkpoint, the final weights, and the training log.
pub fn train<F: Scalar>(
    env_cfg: &EnvConfig<F>,
    agent_cfg: &AgentConfig<F>,
    schedule: &TrainSchedule,
) -> Result<TrainOutcome<F>, ExperimentError> {
    train_cell(env_cfg, agent_cfg, schedule, 0, None, "train")
}

/// Trains one policy per climate and evaluates all of them on all climates.
/// Every policy sees identical weather within an evaluation climate, and the
/// rule-based controller is scored on the same weather as a baseline.
pub fn cross_evaluate<F: Scalar>(
    base_env: &EnvConfig<F>,
    agent_cfg: &AgentConfig<F>,
    schedule: &TrainSchedule,
) -> Result<CrossEvalMatrix<F>, ExperimentError> {
    schedule.validate()?;
    let climates = ClimateName::ALL;
    let mut outcomes = Vec::with_capacity(climates.len());
    for (i, &train_climate) in climates.iter().enumerate() {
        let outcome = train_cell(
            base_env,
            agent_cfg,
            schedule,
            i as u64,
            Some(train_climate),
            "crosseval",
        )?;
        outcomes.push((train_climate, outcome));
    }

    let eval_env = |j: usize, eval_climate| {
        make_env(
            base_env,
            Some(eval_climate),
            derive_seed(schedule.seed, SEED_TAG_EVAL_ENV, CROSS_EVAL_SALT + j as u64),
        )
    };
    let mut cells = Vec::with_capacity(climates.len() * climates.len());
    for (train_climate, outcome) in &outcomes {
        for (j, &eval_climate) in climates.iter().enumerate() {
            let mut env = eval_env(j, eval_climate)?;
            let (summary, _) = evaluate(
                &mut env,
                EvalActor::Policy(&outcome.best_policy),
                schedule.eval_length,
                false,
            )?;
            cells.push(CrossCell {
                train_climate: *train_climate,
                eval_climate,
                summary,
            });
        }
    }
    let mut rbc_baselines = Vec::with_capacity(climates.len());
    for (j, &eval_climate) in climates.iter().enumerate() {
        let mut env = eval_env(j, eval_climate)?;
        let (summary, _) = evaluate(&mut env, EvalActor::RuleBased, schedule.eval_length, false)?;
        rbc_baselines.push((eval_climate, summary));
    }
    Ok(CrossEvalMatrix {
        cells,
        rbc_baselines,
    })
}

/// Trains a single agent through the climates of `order` in sequence. Best
/// retention restarts each phase; the returned best policy is the best of
/// the final phase (falling back to the final weights when a short phase
/// has no checkpoint).
pub fn curriculum_train<F: Scalar>(
    base_env: &EnvConfig<F>,
    agent_cfg: &AgentConfig<F>,
    order: &[ClimateName],
    schedule: &TrainSchedule,
    opts: &CurriculumOptions,
) -> Result<TrainOutcome<F>, ExperimentError> {
    schedule.validate()?;
    if order.is_empty() {
        return Err(ExperimentError::Protocol(
            "curriculum needs at least one climate".into(),
        ));
    }
    let per_phase = opts.episodes_per_phase.unwrap_or(schedule.n_train_episodes);
    if per_phase == 0 {
        return Err(ExperimentError::Protocol(
            "episodes_per_phase must be positive".into(),
        ));
    }

    let mut cfg = agent_cfg.clone();
    cfg.seed = derive_seed(schedule.seed, SEED_TAG_AGENT, 0);
    let first_kind = make_env(base_env, Some(order[0]), 0)?.kind();
    let mut agent = Agent::new(
        first_kind.observation_size(),
        first_kind.action_pairs() * 2,
        cfg,
    )?;

    let mut phases = Vec::with_capacity(order.len());
    let mut best = None;
    let mut last_envs = None;
    for (i, &climate) in order.iter().enumerate() {
        let mut train_env = make_env(
            base_env,
            Some(climate),
            derive_seed(schedule.seed, SEED_TAG_TRAIN_ENV, i as u64),
        )?;
        let mut eval_env = make_env(
            base_env,
            Some(climate),
            derive_seed(schedule.seed, SEED_TAG_EVAL_ENV, i as u64),
        )?;
        if i > 0 && !opts.carry_buffer {
            agent.clear_experience();
        }
        best = None;
        phases.push(run_phase(
            &mut agent,
            &mut train_env,
            &mut eval_env,
            schedule,
            per_phase,
            climate.as_str(),
            &mut best,
        )?);
        last_envs = Some((train_env, eval_env));
    }

    let (final_train_env, mut final_eval_env) =
        last_envs.expect("order is non-empty, so at least one phase ran");
    let final_policy = snapshot(&agent, &final_train_env);
    let (best_eval_reward, best_policy) = match best {
        Some((reward, policy)) => (reward, policy),
        None => {
            let (summary, _) = evaluate(
                &mut final_eval_env,
                EvalActor::Policy(&final_policy),
                schedule.eval_length,
                false,
            )?;
            (summary.mean_episode_reward, final_policy.clone())
        }
    };
    let id = run_id(
        "curriculum",
        final_train_env.kind().building_name(),
        *order.last().expect("order is non-empty"),
        agent_cfg.algorithm,
        schedule.seed,
    );
    Ok(TrainOutcome {
        best_policy,
        final_policy,
        best_eval_reward,
        log: TrainingLog {
            run_id: id,
            phases,
        },
    })
}

/// Trains one policy per comfort weight and evaluates each best policy on
/// weather shared across the whole sweep, so the comfort/consumption
/// trade-off is measured under identical conditions.
pub fn tradeoff_sweep<F: Scalar>(
    base_env: &EnvConfig<F>,
    agent_cfg: &AgentConfig<F>,
    omegas: &[F],
    schedule: &TrainSchedule,
) -> Result<Vec<OmegaResult<F>>, ExperimentError> {
    schedule.validate()?;
    if omegas.is_empty() {
        return Err(ExperimentError::Protocol(
            "trade-off sweep needs at least one comfort weight".into(),
        ));
    }
    for &omega in omegas {
        if !(omega >= F::zero() && omega <= F::one()) {
            return Err(ExperimentError::Protocol(format!(
                "comfort weight {omega} outside [0, 1]"
            )));
        }
    }

    let mut results = Vec::with_capacity(omegas.len());
    for (k, &omega) in omegas.iter().enumerate() {
        let mut env_cfg = base_env.clone();
        env_cfg.reward.omega = omega;
        let mut outcome = train_cell(&env_cfg, agent_cfg, schedule, k as u64, None, "tradeoff")?;
        outcome.log.run_id = format!("{}-w{omega}", outcome.log.run_id);

        let mut eval_env = make_env(
            &env_cfg,
            None,
            derive_seed(schedule.seed, SEED_TAG_EVAL_ENV, TRADEOFF_EVAL_SALT),
        )?;
        let (summary, _) = evaluate(
            &mut eval_env,
            EvalActor::Policy(&outcome.best_policy),
            schedule.eval_length,
            false,
        )?;
        results.push(OmegaResult {
            omega,
            outcome,
            summary,
        });
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drl::Algorithm;

    fn tiny_env(building: &str) -> EnvConfig<f64> {
        EnvConfig {
            building: building.to_string(),
            climate: ClimateName::Hot,
            episode_length_steps: 48,
            episode_start_day_of_year: 182,
            ..EnvConfig::default()
        }
    }

    fn tiny_agent(algorithm: Algorithm) -> AgentConfig<f64> {
        let mut cfg = AgentConfig::defaults(algorithm);
        cfg.hidden_sizes = vec![8, 8];
        cfg.batch_size = 8;
        cfg.learning_starts = 16;
        cfg.train_freq = 8;
        cfg.n_steps = 48;
        cfg.n_epochs = 2;
        cfg
    }

    fn tiny_schedule() -> TrainSchedule {
        TrainSchedule {
            n_train_episodes: 4,
            eval_frequency: 2,
            eval_length: 1,
            seed: 7,
        }
    }

    #[test]
    fn train_logs_episodes_and_retains_best_checkpoint() {
        let outcome = train(&tiny_env("five_zone"), &tiny_agent(Algorithm::Sac), &tiny_schedule())
            .unwrap();
        let phase = &outcome.log.phases[0];
        assert_eq!(phase.episodes.len(), 4);
        assert_eq!(phase.checkpoints.len(), 2);
        assert!(phase.checkpoints[0].retained);
        assert_eq!(phase.checkpoints[0].after_episode, 2);
        assert_eq!(phase.checkpoints[1].after_episode, 4);
        let best_seen = phase
            .checkpoints
            .iter()
            .map(|c| c.mean_eval_reward)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(outcome.best_eval_reward, best_seen);
        for c in &phase.checkpoints {
            assert!(c.mean_eval_reward.is_finite());
        }
        assert_eq!(
            outcome.log.run_id,
            "train-five_zone-hot-sac-s7"
        );
        assert!(outcome.best_policy.normalization_bounds.is_some());
    }

    #[test]
    fn train_is_deterministic_for_a_seed() {
        let env = tiny_env("five_zone");
        let agent = tiny_agent(Algorithm::Td3);
        let schedule = tiny_schedule();
        let a = train(&env, &agent, &schedule).unwrap();
        let b = train(&env, &agent, &schedule).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(
            a.best_policy.to_json().unwrap(),
            b.best_policy.to_json().unwrap()
        );
    }

    #[test]
    fn evaluate_runs_rule_based_and_random_actors() {
        let mut env = HvacEnv::new(tiny_env("five_zone")).unwrap();
        let (rbc, trace) = evaluate(&mut env, EvalActor::RuleBased, 2, true).unwrap();
        assert_eq!(rbc.episodes.len(), 2);
        // One observed zone, trace covers episode 0 only.
        assert_eq!(trace.len(), 48);
        assert!(rbc.mean_episode_reward.is_finite());

        let (random, _) = evaluate(&mut env, EvalActor::Random(3), 2, false).unwrap();
        assert!(random.mean_episode_reward.is_finite());

        let mut dc = HvacEnv::new(tiny_env("two_zone_datacenter")).unwrap();
        let (rbc_dc, trace_dc) = evaluate(&mut dc, EvalActor::RuleBased, 1, true).unwrap();
        assert!(rbc_dc.mean_episode_reward.is_finite());
        // Two observed zones per step.
        assert_eq!(trace_dc.len(), 96);
        assert_eq!(trace_dc[0].zone, "west");
        assert_eq!(trace_dc[1].zone, "east");
    }

    #[test]
    fn trace_agrees_with_streaming_metrics() {
        let mut env = HvacEnv::new(tiny_env("five_zone")).unwrap();
        let (summary, trace) = evaluate(&mut env, EvalActor::RuleBased, 1, true).unwrap();
        let per_step: Vec<&TraceRow<f64>> = trace.iter().collect();
        let n = per_step.len() as f64;
        let mean_reward = per_step.iter().map(|r| r.reward).sum::<f64>() / n;
        let mean_power = per_step.iter().map(|r| r.power_w).sum::<f64>() / n;
        assert_eq!(summary.episodes[0].mean_reward, mean_reward);
        assert_eq!(summary.episodes[0].mean_power_w, mean_power);
    }

    #[test]
    fn evaluation_is_repeatable_across_calls() {
        let mut env = HvacEnv::new(tiny_env("five_zone")).unwrap();
        let (a, _) = evaluate(&mut env, EvalActor::RuleBased, 1, false).unwrap();
        let (b, _) = evaluate(&mut env, EvalActor::RuleBased, 1, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn curriculum_runs_phases_and_falls_back_without_checkpoints() {
        let env = tiny_env("five_zone");
        let agent = tiny_agent(Algorithm::Sac);
        let schedule = tiny_schedule();
        let opts = CurriculumOptions {
            carry_buffer: false,
            episodes_per_phase: Some(1),
        };
        let order = [ClimateName::Cool, ClimateName::Hot];
        let outcome = curriculum_train(&env, &agent, &order, &schedule, &opts).unwrap();
        assert_eq!(outcome.log.phases.len(), 2);
        assert_eq!(outcome.log.phases[0].phase, "cool");
        assert_eq!(outcome.log.phases[1].phase, "hot");
        // One episode per phase never reaches eval_frequency 2.
        assert!(outcome.log.phases.iter().all(|p| p.checkpoints.is_empty()));
        assert!(outcome.best_eval_reward.is_finite());
        assert_eq!(outcome.log.run_id, "curriculum-five_zone-hot-sac-s7");
    }

    #[test]
    fn tradeoff_rejects_out_of_range_weights() {
        let err = tradeoff_sweep(
            &tiny_env("five_zone"),
            &tiny_agent(Algorithm::Sac),
            &[0.5, 1.5],
            &tiny_schedule(),
        )
        .unwrap_err();
        assert!(matches!(err, ExperimentError::Protocol(_)));
    }

    #[test]
    fn run_id_is_stable() {
        assert_eq!(
            run_id("train", "five_zone", ClimateName::Mixed, Algorithm::Ppo, 42),
            "train-five_zone-mixed-ppo-s42"
        );
    }
}

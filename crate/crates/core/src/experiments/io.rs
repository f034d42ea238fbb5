//! CSV renderings of protocol results. Every function returns the full
//! file contents as a `String` with a header row, `\n` line endings, and
//! shortest-round-trip float formatting, so identical results serialize to
//! identical bytes.

use std::fmt::Write;

use crate::scalar::Scalar;
use crate::weather::CSV_TIMESTAMP_FORMAT;

use super::{CrossEvalMatrix, MetricsSummary, OmegaResult, TraceRow, TrainingLog};

/// Per-episode training metrics, one row per (phase, episode). Episode
/// numbers restart at 1 in each phase.
pub fn metrics_csv<F: Scalar>(log: &TrainingLog<F>) -> String {
    let mut out =
        String::from("run_id,phase,episode,mean_reward,mean_power_w,comfort_violation_pct,mean_violation_degc\n");
    for phase in &log.phases {
        for (i, e) in phase.episodes.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                log.run_id,
                phase.phase,
                i + 1,
                e.mean_reward,
                e.mean_power_w,
                e.comfort_violation_pct,
                e.mean_violation_degc
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}

/// Evaluation checkpoints, one row per checkpoint per phase.
pub fn checkpoints_csv<F: Scalar>(log: &TrainingLog<F>) -> String {
    let mut out = String::from("run_id,phase,after_episode,mean_eval_reward,retained\n");
    for phase in &log.phases {
        for c in &phase.checkpoints {
            writeln!(
                out,
                "{},{},{},{},{}",
                log.run_id, phase.phase, c.after_episode, c.mean_eval_reward, c.retained
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}

/// The climate cross-evaluation matrix in train-major order, followed by
/// one `rbc` row per evaluation climate.
pub fn crosseval_csv<F: Scalar>(matrix: &CrossEvalMatrix<F>) -> String {
    let mut out = String::from("train_climate,eval_climate,mean_reward,sd_reward\n");
    let mut row = |train: &str, eval: &str, s: &MetricsSummary<F>| {
        writeln!(
            out,
            "{},{},{},{}",
            train, eval, s.mean_episode_reward, s.sd_episode_reward
        )
        .expect("writing to a String cannot fail");
    };
    for cell in &matrix.cells {
        row(
            cell.train_climate.as_str(),
            cell.eval_climate.as_str(),
            &cell.summary,
        );
    }
    for (climate, summary) in &matrix.rbc_baselines {
        row("rbc", climate.as_str(), summary);
    }
    out
}

/// Step-level trace of an evaluation episode, one row per observed zone per
/// step. The comfort band columns carry the range the reward used for that
/// interval, so seasonal switches are visible in the data itself.
pub fn trace_csv<F: Scalar>(rows: &[TraceRow<F>]) -> String {
    let mut out = String::from(
        "step,datetime,outdoor_c,zone,zone_temp_c,heating_sp,cooling_sp,power_w,reward,comfort_low,comfort_high\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.datetime.format(CSV_TIMESTAMP_FORMAT),
            r.outdoor_c,
            r.zone,
            r.zone_temp_c,
            r.heating_sp,
            r.cooling_sp,
            r.power_w,
            r.reward,
            r.comfort_low,
            r.comfort_high
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Final evaluation metrics per comfort weight.
pub fn tradeoff_csv<F: Scalar>(results: &[OmegaResult<F>]) -> String {
    let mut out = String::from(
        "omega,mean_reward,sd_reward,mean_power_w,comfort_violation_pct,mean_violation_degc\n",
    );
    for r in results {
        let s = &r.summary;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.omega,
            s.mean_episode_reward,
            s.sd_episode_reward,
            s.mean_power_w,
            s.comfort_violation_pct,
            s.mean_violation_degc
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;

    use super::*;
    use crate::experiments::{
        CheckpointRecord, CrossCell, EpisodeMetrics, PhaseLog, TrainingLog,
    };
    use crate::weather::ClimateName;

    fn metrics(reward: f64) -> EpisodeMetrics<f64> {
        EpisodeMetrics {
            mean_reward: reward,
            mean_power_w: 1500.0,
            comfort_violation_pct: 12.5,
            mean_violation_degc: 0.25,
        }
    }

    fn summary(reward: f64) -> MetricsSummary<f64> {
        MetricsSummary::from_episodes(vec![metrics(reward)])
    }

    #[test]
    fn metrics_csv_is_byte_stable() {
        let log = TrainingLog {
            run_id: "train-five_zone-hot-sac-s42".to_string(),
            phases: vec![PhaseLog {
                phase: "train".to_string(),
                episodes: vec![metrics(-1.5), metrics(-1.25)],
                checkpoints: vec![],
            }],
        };
        assert_eq!(
            metrics_csv(&log),
            "run_id,phase,episode,mean_reward,mean_power_w,comfort_violation_pct,mean_violation_degc\n\
             train-five_zone-hot-sac-s42,train,1,-1.5,1500,12.5,0.25\n\
             train-five_zone-hot-sac-s42,train,2,-1.25,1500,12.5,0.25\n"
        );
    }

    #[test]
    fn checkpoints_csv_lists_retention() {
        let log = TrainingLog {
            run_id: "r".to_string(),
            phases: vec![PhaseLog {
                phase: "train".to_string(),
                episodes: vec![],
                checkpoints: vec![
                    CheckpointRecord {
                        after_episode: 4,
                        mean_eval_reward: -2.0,
                        retained: true,
                    },
                    CheckpointRecord {
                        after_episode: 8,
                        mean_eval_reward: -2.5,
                        retained: false,
                    },
                ],
            }],
        };
        assert_eq!(
            checkpoints_csv(&log),
            "run_id,phase,after_episode,mean_eval_reward,retained\n\
             r,train,4,-2,true\n\
             r,train,8,-2.5,false\n"
        );
    }

    #[test]
    fn crosseval_csv_appends_rbc_rows() {
        let matrix = CrossEvalMatrix {
            cells: vec![CrossCell {
                train_climate: ClimateName::Cool,
                eval_climate: ClimateName::Hot,
                summary: summary(-3.0),
            }],
            rbc_baselines: vec![(ClimateName::Hot, summary(-2.0))],
        };
        assert_eq!(
            crosseval_csv(&matrix),
            "train_climate,eval_climate,mean_reward,sd_reward\n\
             cool,hot,-3,0\n\
             rbc,hot,-2,0\n"
        );
    }

    #[test]
    fn trace_csv_formats_timestamps_to_the_minute()
    {
        let rows = vec![TraceRow {
            step: 0,
            datetime: NaiveDate::from_ymd_opt(2021, 7, 1)
                .unwrap()
                .and_hms_opt(0, 15, 0)
                .unwrap(),
            outdoor_c: 30.5,
            zone: "core",
            zone_temp_c: 24.25,
            heating_sp: 20.0,
            cooling_sp: 23.5,
            power_w: 2000.0,
            reward: -0.2,
            comfort_low: 23.0,
            comfort_high: 26.0,
        }];
        assert_eq!(
            trace_csv(&rows),
            "step,datetime,outdoor_c,zone,zone_temp_c,heating_sp,cooling_sp,power_w,reward,comfort_low,comfort_high\n\
             0,2021-07-01T00:15,30.5,core,24.25,20,23.5,2000,-0.2,23,26\n"
        );
    }

    #[test]
    fn tradeoff_csv_lists_one_row_per_weight() {
        let results = vec![crate::experiments::OmegaResult {
            omega: 0.25,
            outcome: crate::experiments::TrainOutcome {
                best_policy: dummy_policy(),
                final_policy: dummy_policy(),
                best_eval_reward: -1.0,
                log: TrainingLog {
                    run_id: "t".to_string(),
                    phases: vec![],
                },
            },
            summary: summary(-1.0),
        }];
        assert_eq!(
            tradeoff_csv(&results),
            "omega,mean_reward,sd_reward,mean_power_w,comfort_violation_pct,mean_violation_degc\n\
             0.25,-1,0,1500,12.5,0.25\n"
        );
    }

    fn dummy_policy() -> crate::drl::TrainedPolicy<f64> {
        use crate::drl::{Agent, AgentConfig, Algorithm};
        let mut cfg = AgentConfig::defaults(Algorithm::Sac);
        cfg.hidden_sizes = vec![4];
        Agent::new(3, 2, cfg).unwrap().policy()
    }
}

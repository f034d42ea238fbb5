//! Stateless one-dimensional control: the reward is a negative quadratic in
//! the executed action, so every algorithm's deterministic policy should
//! move to the optimum. This exercises the full act/record/update loop
//! end to end without an environment in the way.

use thermoarena::drl::{Agent, AgentConfig, Algorithm};

const TARGET: f64 = 0.3;
const TOLERANCE: f64 = 0.05;
const MAX_UPDATES: u64 = 5000;

fn bandit_cfg(algorithm: Algorithm, seed: u64) -> AgentConfig<f64> {
    let mut cfg = AgentConfig::defaults(algorithm);
    cfg.seed = seed;
    cfg.hidden_sizes = vec![32, 32];
    cfg.learning_rate = 3e-3;
    match algorithm {
        Algorithm::Sac | Algorithm::Td3 => {
            cfg.batch_size = 64;
            cfg.learning_starts = 128;
            cfg.train_freq = 1;
            cfg.buffer_size = 20_000;
        }
        Algorithm::Ppo => {
            cfg.n_steps = 128;
            cfg.batch_size = 32;
            cfg.n_epochs = 10;
        }
    }
    cfg
}

/// Trains until the deterministic action is within tolerance of the target
/// or the update budget runs out; returns the final action and the number
/// of updates used.
fn train_bandit(algorithm: Algorithm, seed: u64) -> (f64, u64) {
    let mut agent = Agent::new(1, 1, bandit_cfg(algorithm, seed)).unwrap();
    let obs = [0.0_f64];
    loop {
        let units = agent.act_stochastic(&obs).unwrap();
        let a = units[0];
        let reward = -(a - TARGET) * (a - TARGET);
        let updated = agent.record(&obs, &units, reward, &obs, true).unwrap();
        if updated > 0 && agent.gradient_updates() % 50 == 0 {
            let mean = agent.act_deterministic(&obs).unwrap()[0];
            if (mean - TARGET).abs() < TOLERANCE {
                return (mean, agent.gradient_updates());
            }
        }
        if agent.gradient_updates() >= MAX_UPDATES {
            return (
                agent.act_deterministic(&obs).unwrap()[0],
                agent.gradient_updates(),
            );
        }
    }
}

fn check_algorithm(algorithm: Algorithm) {
    let seeds = [42_u64, 43, 44];
    let mut successes = 0;
    let mut report = Vec::new();
    for &seed in &seeds {
        let (mean, updates) = train_bandit(algorithm, seed);
        let ok = (mean - TARGET).abs() < TOLERANCE;
        report.push(format!("seed {seed}: action {mean:.4} after {updates} updates"));
        if ok {
            successes += 1;
        }
        if successes >= 2 {
            break;
        }
    }
    assert!(
        successes >= 2,
        "{algorithm} solved the bandit on {successes}/3 seeds:\n{}",
        report.join("\n")
    );
}

#[test]
fn sac_solves_the_quadratic_bandit() {
    check_algorithm(Algorithm::Sac);
}

#[test]
fn td3_solves_the_quadratic_bandit() {
    check_algorithm(Algorithm::Td3);
}

#[test]
fn ppo_solves_the_quadratic_bandit() {
    check_algorithm(Algorithm::Ppo);
}

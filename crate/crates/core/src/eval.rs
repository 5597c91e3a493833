//! Batch evaluation of policies and the CSV report format.

use crate::agents::Policy;
use crate::env::{EpisodeOutcome, IntersectionEnv};

/// Aggregated result of evaluating one agent on one scenario.
#[derive(Debug, Clone)]
pub struct EvalRow {
    pub scenario: String,
    pub agent: String,
    pub episodes: usize,
    pub successes: usize,
    /// Collisions plus near-collisions.
    pub early_terminations: usize,
    pub timeouts: usize,
}

impl EvalRow {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.episodes as f64
    }

    pub fn early_termination_rate(&self) -> f64 {
        self.early_terminations as f64 / self.episodes as f64
    }
}

/// Runs `episodes` episodes with deterministic per-episode seeds derived from
/// `base_seed` and counts outcomes. The policy acts on every step until the
/// episode terminates.
pub fn run_eval(
    env: &mut IntersectionEnv,
    policy: &mut dyn Policy,
    agent_name: &str,
    episodes: usize,
    base_seed: u64,
) -> EvalRow {
    let mut row = EvalRow {
        scenario: env.scenario().spec.name.clone(),
        agent: agent_name.to_string(),
        episodes,
        successes: 0,
        early_terminations: 0,
        timeouts: 0,
    };
    for ep in 0..episodes {
        let seed = episode_seed(base_seed, ep);
        env.reset(seed);
        loop {
            let action = policy.act(env);
            let res = env.step(action);
            if res.terminal {
                match res.outcome {
                    EpisodeOutcome::Success => row.successes += 1,
                    EpisodeOutcome::Collision | EpisodeOutcome::NearCollision => {
                        row.early_terminations += 1
                    }
                    EpisodeOutcome::Timeout => row.timeouts += 1,
                    EpisodeOutcome::Running => unreachable!("terminal step reports an outcome"),
                }
                break;
            }
        }
    }
    row
}

pub fn episode_seed(base_seed: u64, episode: usize) -> u64 {
    base_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(episode as u64)
}

/// Renders rows as CSV with percentage columns at one decimal and a trailing
/// mean row. Output is byte-deterministic for a fixed input.
pub fn emit_report(rows: &[EvalRow]) -> String {
    let mut out = String::from("scenario,agent,episodes,success_rate,early_termination_rate,timeouts\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.1},{:.1},{}\n",
            r.scenario,
            r.agent,
            r.episodes,
            100.0 * r.success_rate(),
            100.0 * r.early_termination_rate(),
            r.timeouts
        ));
    }
    if !rows.is_empty() {
        let mean_sr = rows.iter().map(|r| r.success_rate()).sum::<f64>() / rows.len() as f64;
        let mean_etr =
            rows.iter().map(|r| r.early_termination_rate()).sum::<f64>() / rows.len() as f64;
        let timeouts: usize = rows.iter().map(|r| r.timeouts).sum();
        let episodes: usize = rows.iter().map(|r| r.episodes).sum();
        out.push_str(&format!(
            "Mean,{},{},{:.1},{:.1},{}\n",
            rows[0].agent, episodes, 100.0 * mean_sr, 100.0 * mean_etr, timeouts
        ));
    }
    out
}

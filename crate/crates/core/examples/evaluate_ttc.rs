//! Evaluates the time-gap baseline on every builtin scenario and prints the
//! CSV report.
//!
//! ```text
//! cargo run --release --example evaluate_ttc -- 100
//! ```

use crossing_sim::agents::ttc::TtcPolicy;
use crossing_sim::env::{EnvConfig, IntersectionEnv, RewardWeights};
use crossing_sim::eval::{emit_report, run_eval};
use crossing_sim::scenarios::ScenarioLibrary;

fn main() {
    let episodes: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(100);
    let lib = ScenarioLibrary::builtin();
    let mut rows = Vec::new();
    for name in lib.names() {
        let mut env = IntersectionEnv::new(
            lib.get(name).unwrap(),
            EnvConfig {
                occlusions_enabled: true,
                include_ibit: true,
                weights: RewardWeights::default(),
            },
        );
        rows.push(run_eval(&mut env, &mut TtcPolicy::default(), "ttc", episodes, 0));
    }
    print!("{}", emit_report(&rows));
}

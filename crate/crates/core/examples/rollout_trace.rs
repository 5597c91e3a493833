//! Runs one episode under the time-gap baseline and prints the step trace.
//!
//! ```text
//! cargo run --example rollout_trace -- Sc07 11
//! ```

use crossing_sim::agents::ttc::TtcPolicy;
use crossing_sim::agents::Policy;
use crossing_sim::env::{EnvConfig, IntersectionEnv, RewardWeights};
use crossing_sim::scenarios::ScenarioLibrary;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "Sc07".to_string());
    let seed: u64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(11);

    let scenario = ScenarioLibrary::builtin().get(&name).expect("builtin scenario");
    let mut env = IntersectionEnv::new(
        scenario,
        EnvConfig {
            occlusions_enabled: true,
            include_ibit: true,
            weights: RewardWeights::default(),
        },
    );
    let mut policy = TtcPolicy::default();
    env.reset(seed);
    println!("{}", IntersectionEnv::trace_header());
    loop {
        let action = policy.act(&env);
        let w = env.world();
        let (t, s, v) = (w.t, w.ego.s_front, w.ego.v);
        let res = env.step(action);
        println!(
            "{t:.1},{s:.2},{v:.2},{:.0},{:.4},{:?}",
            action.accel(),
            res.reward,
            res.outcome
        );
        if res.terminal {
            break;
        }
    }
}

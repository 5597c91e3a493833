//! Prints the patch observation for the first steps of an episode.
//!
//! ```text
//! cargo run --example encode_frame -- Sc02 42
//! ```

use crossing_sim::env::{Action, EnvConfig, IntersectionEnv, RewardWeights};
use crossing_sim::scenarios::ScenarioLibrary;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "Sc02".to_string());
    let seed: u64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(42);

    let scenario = ScenarioLibrary::builtin().get(&name).expect("builtin scenario");
    let mut env = IntersectionEnv::new(
        scenario,
        EnvConfig {
            occlusions_enabled: true,
            include_ibit: true,
            weights: RewardWeights::default(),
        },
    );
    env.reset(seed);

    for step in 0..3 {
        let w = env.world();
        println!(
            "step {step}: t = {:.1} s, ego s = {:.1} m, v = {:.1} m/s, {} vehicles",
            w.t,
            w.ego.s_front,
            w.ego.v,
            w.traffic.len()
        );
        println!("patch   tto   ttv  next  ego  i");
        let frame = env.frame();
        for (k, p) in frame.patches.iter().enumerate() {
            // Only print patches that carry information.
            if p.tto < 1.0 || p.i_int {
                println!(
                    "{k:>5} {:>5.2} {:>5.2} {:>5.2} {:>4.2}  {}",
                    p.tto,
                    p.ttv,
                    p.tto_next,
                    p.tto_ego,
                    if p.i_int { "x" } else { "." }
                );
            }
        }
        env.step(Action::Maintain);
    }
}

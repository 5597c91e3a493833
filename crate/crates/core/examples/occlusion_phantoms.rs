//! Shows how buildings shadow the crossing lanes and where the worst-case
//! phantoms stand in as the ego approaches the junction.
//!
//! ```text
//! cargo run --example occlusion_phantoms -- Sc07 3
//! ```

use crossing_sim::env::{Action, EnvConfig, IntersectionEnv, RewardWeights};
use crossing_sim::scenarios::ScenarioLibrary;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "Sc07".to_string());
    let seed: u64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(3);

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

    loop {
        let w = env.world();
        let frame = env.frame();
        let occupied = frame.patches.iter().filter(|p| p.tto < 1.0).count();
        println!(
            "t = {:5.1} s  ego s = {:6.1} m  v = {:4.1} m/s  occupied patches: {occupied}",
            w.t, w.ego.s_front, w.ego.v
        );
        // The first intersection patch summarizes what the ego knows about
        // cross traffic, phantoms included.
        if let Some((k, p)) = frame.patches.iter().enumerate().find(|(_, p)| p.i_int) {
            println!(
                "    junction patch {k}: tto {:.2}, ttv {:.2}, next {:.2}",
                p.tto, p.ttv, p.tto_next
            );
        }
        let res = env.step(Action::Maintain);
        if res.terminal {
            println!("episode ended: {:?}", res.outcome);
            break;
        }
    }
}

//! Short DQN training run that prints the progress log. Not long enough to
//! produce a good driver; use the `train` subcommand of the CLI for that.
//!
//! ```text
//! cargo run --release --example train_smoke -- 20000
//! ```

use crossing_sim::agents::dqn::{DqnConfig, Trainer, Variant};

fn main() {
    let steps: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(20_000);
    let cfg = DqnConfig {
        total_steps: steps,
        log_interval: (steps / 10).max(1),
        ..DqnConfig::default()
    };
    let mut trainer = Trainer::new(Variant::A1, cfg, 0);
    let (ckpt, records) = trainer.train();
    println!("step,episodes,epsilon,mean_return,success_rate");
    for r in &records {
        println!(
            "{},{},{:.3},{:.2},{:.3}",
            r.step, r.episodes, r.epsilon, r.mean_episode_return, r.success_rate
        );
    }
    println!("trained {} steps on {:?}", ckpt.steps_trained, ckpt.variant);
}

//! Decision makers: the rule-based time-gap baseline and the DQN learner.

pub mod dqn;
pub mod mlp;
pub mod replay;
pub mod ttc;

use crate::env::{Action, IntersectionEnv};

/// Anything that can drive the environment.
pub trait Policy {
    fn act(&mut self, env: &IntersectionEnv) -> Action;
}

/// Uniform-random baseline.
pub struct RandomPolicy {
    rng: rand_chacha::ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        use rand::SeedableRng;
        Self { rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _env: &IntersectionEnv) -> Action {
        use rand::Rng;
        Action::from_index(self.rng.gen_range(0..3))
    }
}

/// Always-decelerate baseline (stops short of the junction).
pub struct ConstantPolicy(pub Action);

impl Policy for ConstantPolicy {
    fn act(&mut self, _env: &IntersectionEnv) -> Action {
        self.0
    }
}

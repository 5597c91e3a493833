//! Intersection-crossing simulator and reinforcement-learning harness.
//!
//! The crate provides:
//! - [`geometry`]: arc-length parameterized driving paths, corridor conflict
//!   detection and line-of-sight occlusion shadows,
//! - [`sim`]: a discrete-time world with randomized vehicle flows and
//!   collision / near-collision / success detection,
//! - [`encoder`]: the ego-relative patch observation (50 one-meter patches
//!   carrying occupancy timing ahead of the ego vehicle),
//! - [`env`]: the episodic MDP wrapper (reset/step, reward, termination),
//! - [`agents`]: a rule-based time-gap baseline and a from-scratch DQN
//!   learner with prioritized replay and Double-Q targets,
//! - [`scenarios`]: the built-in thirteen-scenario library (Sc01..Sc13),
//! - [`eval`]: batch evaluation with success-rate / early-termination-rate
//!   reporting.
//!
//! See the `examples/` directory for one runnable example per capability and
//! the `crossing-sim` binary for the command-line entry points.

pub mod agents;
pub mod constants;
pub mod encoder;
pub mod env;
pub mod eval;
pub mod geometry;
pub mod scenarios;
pub mod sim;

//! Deep Q-learning with a target network, double-Q targets and prioritized
//! replay.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::N_ACTIONS;
use crate::env::{Action, EnvConfig, IntersectionEnv, RewardWeights};
use crate::scenarios::ScenarioLibrary;

use super::mlp::{argmax, huber, Adam, Mlp};
use super::replay::{PrioritizedReplay, ReplayEntry};
use super::Policy;

/// Training variants: which scenarios feed the replay buffer and which
/// observation flags are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Car following only.
    A1,
    /// Six-lane crossing only.
    A2,
    /// Mix of A1 and A2 scenarios, sampled uniformly per episode.
    A3,
    /// Six-lane crossing with occlusions, without the intersection bit.
    A4,
    /// Six-lane crossing without occlusions, with the intersection bit.
    A5,
}

impl Variant {
    pub fn scenario_names(self) -> &'static [&'static str] {
        match self {
            Variant::A1 => &["Sc02"],
            Variant::A2 | Variant::A4 | Variant::A5 => &["Sc07"],
            Variant::A3 => &["Sc02", "Sc07"],
        }
    }

    pub fn occlusions_enabled(self) -> bool {
        !matches!(self, Variant::A5)
    }

    pub fn include_ibit(self) -> bool {
        !matches!(self, Variant::A4)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::A1 => "A1",
            Variant::A2 => "A2",
            Variant::A3 => "A3",
            Variant::A4 => "A4",
            Variant::A5 => "A5",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "A1" => Some(Variant::A1),
            "A2" => Some(Variant::A2),
            "A3" => Some(Variant::A3),
            "A4" => Some(Variant::A4),
            "A5" => Some(Variant::A5),
            _ => None,
        }
    }

    pub fn env_config(self) -> EnvConfig {
        EnvConfig {
            occlusions_enabled: self.occlusions_enabled(),
            include_ibit: self.include_ibit(),
            weights: RewardWeights::default(),
        }
    }
}

/// Hyper-parameters. Defaults are the values used throughout the crate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub per_alpha: f64,
    pub per_beta_start: f64,
    pub warmup: usize,
    pub target_sync: usize,
    pub total_steps: usize,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Fraction of the step budget over which epsilon decays linearly.
    pub eps_fraction: f64,
    /// Steps between progress/checkpoint records; 0 disables.
    pub log_interval: usize,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            hidden: vec![60, 60],
            gamma: 0.99,
            lr: 2e-4,
            batch_size: 256,
            buffer_capacity: 50_000,
            per_alpha: 0.6,
            per_beta_start: 0.4,
            warmup: 1000,
            target_sync: 10_000,
            total_steps: 2_000_000,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_fraction: 0.3,
            log_interval: 50_000,
        }
    }
}

/// Linear exploration schedule.
pub fn epsilon(step: usize, cfg: &DqnConfig) -> f64 {
    let horizon = (cfg.eps_fraction * cfg.total_steps as f64).max(1.0);
    let frac = (step as f64 / horizon).min(1.0);
    cfg.eps_start + frac * (cfg.eps_end - cfg.eps_start)
}

/// Replay-buffer beta anneals linearly to 1 over the whole budget.
pub fn beta(step: usize, cfg: &DqnConfig) -> f64 {
    let frac = (step as f64 / cfg.total_steps.max(1) as f64).min(1.0);
    cfg.per_beta_start + frac * (1.0 - cfg.per_beta_start)
}

/// Double-Q bootstrap: the online net picks the next action, the target net
/// values it.
pub fn double_q_target(
    reward: f64,
    terminal: bool,
    gamma: f64,
    q_next_online: &[f64],
    q_next_target: &[f64],
) -> f64 {
    if terminal {
        return reward;
    }
    let best = argmax(q_next_online);
    reward + gamma * q_next_target[best]
}

/// Serialized agent: enough to rebuild the greedy policy exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub variant: Variant,
    pub occlusions_enabled: bool,
    pub include_ibit: bool,
    pub layer_sizes: Vec<usize>,
    pub net: Mlp,
    pub seed: u64,
    pub steps_trained: usize,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string(self).expect("checkpoint serializes");
        std::fs::write(path, json)
    }

    pub fn load(path: &Path) -> std::io::Result<Checkpoint> {
        let json = std::fs::read_to_string(path)?;
        serde_json::from_str(&json)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn policy(&self) -> DqnPolicy {
        DqnPolicy { net: self.net.clone() }
    }
}

/// Greedy policy over a trained Q-network.
#[derive(Debug, Clone)]
pub struct DqnPolicy {
    pub net: Mlp,
}

impl Policy for DqnPolicy {
    fn act(&mut self, env: &IntersectionEnv) -> Action {
        let q = self.net.forward(env.last_observation());
        Action::from_index(argmax(&q))
    }
}

/// One row of the training progress log.
#[derive(Debug, Clone)]
pub struct TrainRecord {
    pub step: usize,
    pub episodes: usize,
    pub epsilon: f64,
    pub mean_episode_return: f64,
    pub success_rate: f64,
}

/// Trains a DQN agent and returns the final checkpoint plus the progress log.
pub struct Trainer {
    pub cfg: DqnConfig,
    pub variant: Variant,
    envs: Vec<IntersectionEnv>,
    online: Mlp,
    target: Mlp,
    opt: Adam,
    buffer: PrioritizedReplay,
    rng: ChaCha8Rng,
    seed: u64,
    /// Optional directory for periodic checkpoints and a CSV progress log.
    pub out_dir: Option<PathBuf>,
}

impl Trainer {
    pub fn new(variant: Variant, cfg: DqnConfig, seed: u64) -> Self {
        let lib = ScenarioLibrary::builtin();
        let env_cfg = variant.env_config();
        let envs: Vec<IntersectionEnv> = variant
            .scenario_names()
            .iter()
            .map(|n| IntersectionEnv::new(lib.get(n).expect("builtin scenario"), env_cfg))
            .collect();
        let input = envs[0].observation_len();
        let mut sizes = vec![input];
        sizes.extend(&cfg.hidden);
        sizes.push(N_ACTIONS);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let online = Mlp::new(&sizes, &mut rng);
        let target = online.clone();
        let opt = Adam::new(&online, cfg.lr);
        let buffer = PrioritizedReplay::new(cfg.buffer_capacity, cfg.per_alpha);
        Self { cfg, variant, envs, online, target, opt, buffer, rng, seed, out_dir: None }
    }

    /// Runs the full step budget. One gradient step per environment step once
    /// the buffer holds `warmup` transitions.
    pub fn train(&mut self) -> (Checkpoint, Vec<TrainRecord>) {
        let mut records = Vec::new();
        let mut log_file = self.open_log();
        let mut episodes = 0usize;
        let mut successes = 0usize;
        let mut window_returns: Vec<f64> = Vec::new();
        let mut window_successes = 0usize;
        let mut window_episodes = 0usize;

        let mut env_idx = self.pick_env(episodes);
        let seed = self.episode_seed(episodes);
        let mut obs = self.envs[env_idx].reset(seed);
        let mut ep_return = 0.0;

        for step in 0..self.cfg.total_steps {
            let eps = epsilon(step, &self.cfg);
            let action = if self.rng.gen::<f64>() < eps {
                Action::from_index(self.rng.gen_range(0..N_ACTIONS))
            } else {
                Action::from_index(argmax(&self.online.forward(&obs)))
            };
            let res = self.envs[env_idx].step(action);
            ep_return += res.reward;
            self.buffer.push(ReplayEntry {
                obs: obs.clone(),
                action: action.index(),
                reward: res.reward,
                next_obs: res.observation.clone(),
                // Timeouts truncate the episode without reaching an absorbing
                // state, so their targets still bootstrap.
                terminal: res.terminal
                    && self.envs[env_idx].outcome() != crate::env::EpisodeOutcome::Timeout,
            });
            if res.terminal {
                if self.envs[env_idx].outcome() == crate::env::EpisodeOutcome::Success {
                    successes += 1;
                    window_successes += 1;
                }
                window_returns.push(ep_return);
                window_episodes += 1;
                episodes += 1;
                ep_return = 0.0;
                env_idx = self.pick_env(episodes);
                let seed = self.episode_seed(episodes);
                obs = self.envs[env_idx].reset(seed);
            } else {
                obs = res.observation;
            }

            if self.buffer.len() >= self.cfg.warmup {
                self.gradient_step(beta(step, &self.cfg));
            }
            if (step + 1) % self.cfg.target_sync == 0 {
                self.target = self.online.clone();
            }
            if self.cfg.log_interval > 0 && (step + 1) % self.cfg.log_interval == 0 {
                let mean_ret = if window_returns.is_empty() {
                    0.0
                } else {
                    window_returns.iter().sum::<f64>() / window_returns.len() as f64
                };
                let sr = if window_episodes == 0 {
                    0.0
                } else {
                    window_successes as f64 / window_episodes as f64
                };
                let rec = TrainRecord {
                    step: step + 1,
                    episodes,
                    epsilon: eps,
                    mean_episode_return: mean_ret,
                    success_rate: sr,
                };
                if let Some(f) = log_file.as_mut() {
                    writeln!(
                        f,
                        "{},{},{:.4},{:.4},{:.4}",
                        rec.step, rec.episodes, rec.epsilon, rec.mean_episode_return, rec.success_rate
                    )
                    .ok();
                }
                records.push(rec);
                window_returns.clear();
                window_successes = 0;
                window_episodes = 0;
                if let Some(dir) = &self.out_dir {
                    let ckpt = self.checkpoint(step + 1);
                    ckpt.save(&dir.join(format!("ckpt_{:08}.json", step + 1))).ok();
                }
            }
        }
        let _ = successes;
        (self.checkpoint(self.cfg.total_steps), records)
    }

    pub fn checkpoint(&self, steps_trained: usize) -> Checkpoint {
        let mut layer_sizes = vec![self.online.input_dim()];
        layer_sizes.extend(self.online.layers.iter().map(|l| l.w.ncols()));
        Checkpoint {
            version: 1,
            variant: self.variant,
            occlusions_enabled: self.variant.occlusions_enabled(),
            include_ibit: self.variant.include_ibit(),
            layer_sizes,
            net: self.online.clone(),
            seed: self.seed,
            steps_trained,
        }
    }

    fn open_log(&self) -> Option<std::fs::File> {
        let dir = self.out_dir.as_ref()?;
        std::fs::create_dir_all(dir).ok()?;
        let mut f = std::fs::File::create(dir.join("train_log.csv")).ok()?;
        writeln!(f, "step,episodes,epsilon,mean_episode_return,success_rate").ok();
        Some(f)
    }

    fn pick_env(&mut self, _episode: usize) -> usize {
        if self.envs.len() == 1 {
            0
        } else {
            self.rng.gen_range(0..self.envs.len())
        }
    }

    fn episode_seed(&self, episode: usize) -> u64 {
        // Distinct stream per episode, reproducible from the base seed.
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(episode as u64)
    }

    /// One prioritized double-Q update.
    fn gradient_step(&mut self, beta: f64) {
        let bs = self.cfg.batch_size.min(self.buffer.len());
        let batch = self.buffer.sample(bs, beta, &mut self.rng);
        let input = self.online.input_dim();

        let mut xs = Array2::zeros((bs, input));
        let mut xns = Array2::zeros((bs, input));
        for (row, &i) in batch.indices.iter().enumerate() {
            let e = self.buffer.entry(i);
            for (c, &v) in e.obs.iter().enumerate() {
                xs[[row, c]] = v;
            }
            for (c, &v) in e.next_obs.iter().enumerate() {
                xns[[row, c]] = v;
            }
        }

        let (q, cache) = self.online.forward_batch(&xs);
        // Double Q: argmax from the online net, value from the target net.
        let (qn_online, _) = self.online.forward_batch(&xns);
        let (qn_target, _) = self.target.forward_batch(&xns);

        let mut dout = Array2::zeros((bs, N_ACTIONS));
        let mut td_errors = Vec::with_capacity(bs);
        for (row, &i) in batch.indices.iter().enumerate() {
            let e = self.buffer.entry(i);
            let target = double_q_target(
                e.reward,
                e.terminal,
                self.cfg.gamma,
                qn_online.row(row).as_slice().unwrap(),
                qn_target.row(row).as_slice().unwrap(),
            );
            let pred = q[[row, e.action]];
            let (_, dl) = huber(pred, target);
            td_errors.push(pred - target);
            // Mean loss over the batch, scaled by the importance weight.
            dout[[row, e.action]] = batch.weights[row] * dl / bs as f64;
        }

        let grads = self.online.backward(&cache, &dout);
        self.opt.step(&mut self.online, &grads);
        self.buffer.update_priorities(&batch.indices, &td_errors);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_schedule_endpoints() {
        let cfg = DqnConfig { total_steps: 1000, ..DqnConfig::default() };
        assert_eq!(epsilon(0, &cfg), 1.0);
        // Decay finishes at 30% of the budget.
        assert!((epsilon(300, &cfg) - 0.05).abs() < 1e-12);
        assert!((epsilon(999, &cfg) - 0.05).abs() < 1e-12);
        let mid = epsilon(150, &cfg);
        assert!((mid - 0.525).abs() < 1e-12);
    }

    #[test]
    fn beta_anneals_to_one() {
        let cfg = DqnConfig { total_steps: 100, ..DqnConfig::default() };
        assert!((beta(0, &cfg) - 0.4).abs() < 1e-12);
        assert!((beta(100, &cfg) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variant_flags() {
        assert!(Variant::A1.include_ibit() && Variant::A1.occlusions_enabled());
        assert!(!Variant::A4.include_ibit() && Variant::A4.occlusions_enabled());
        assert!(Variant::A5.include_ibit() && !Variant::A5.occlusions_enabled());
        assert_eq!(Variant::A3.scenario_names(), &["Sc02", "Sc07"]);
        assert_eq!(Variant::parse("A4"), Some(Variant::A4));
    }

    #[test]
    fn checkpoint_roundtrip() {
        let t = Trainer::new(Variant::A1, DqnConfig { total_steps: 10, ..Default::default() }, 7);
        let ckpt = t.checkpoint(0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        ckpt.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back.layer_sizes, ckpt.layer_sizes);
        assert_eq!(back.net.flat_params(), ckpt.net.flat_params());
        assert_eq!(back.variant, Variant::A1);
    }

    #[test]
    fn short_training_runs_and_is_deterministic() {
        let cfg = DqnConfig {
            total_steps: 400,
            warmup: 64,
            batch_size: 32,
            log_interval: 0,
            ..DqnConfig::default()
        };
        let (a, _) = Trainer::new(Variant::A1, cfg.clone(), 3).train();
        let (b, _) = Trainer::new(Variant::A1, cfg, 3).train();
        assert_eq!(a.net.flat_params(), b.net.flat_params());
    }
}

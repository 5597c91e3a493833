//! Episodic MDP wrapper: reset/step lifecycle, reward, observation assembly
//! and termination bookkeeping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::{
    ACTION_ACCEL, DT, K_ACCEL, K_COLLISION, K_V_LOWER, K_V_UPPER, MAX_STEPS, PREROLL_SECONDS,
    SHADOW_STEP, SPEED_LIMIT, VEHICLE_LENGTH, VEHICLE_WIDTH, V_LOWER, V_UPPER,
};
use crate::encoder::{
    encode, flatten, is_hidden, phantoms_from_occlusion, Frame, LongitudinalVehicle, PathView,
};
use crate::geometry::{visibility_shadow, OccluderPolygon};
use crate::sim::{
    advance_ego, advance_traffic, detect_outcome, spawn_step, OccluderSide, Outcome, Scenario,
    VehicleState, WorldState,
};

/// Longitudinal control action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Accelerate,
    Maintain,
    Decelerate,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Accelerate, Action::Maintain, Action::Decelerate];

    pub fn accel(self) -> f64 {
        match self {
            Action::Accelerate => ACTION_ACCEL,
            Action::Maintain => 0.0,
            Action::Decelerate => -ACTION_ACCEL,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Action::Accelerate => 0,
            Action::Maintain => 1,
            Action::Decelerate => 2,
        }
    }

    pub fn from_index(i: usize) -> Action {
        Self::ALL[i]
    }
}

/// Reward weights (environment defaults match the shipped configuration).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RewardWeights {
    pub k_c: f64,
    pub k_v_upper: f64,
    pub k_v_lower: f64,
    pub k_a: f64,
    pub v_upper: f64,
    pub v_lower: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            k_c: K_COLLISION,
            k_v_upper: K_V_UPPER,
            k_v_lower: K_V_LOWER,
            k_a: K_ACCEL,
            v_upper: V_UPPER,
            v_lower: V_LOWER,
        }
    }
}

/// Episode status after a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpisodeOutcome {
    Running,
    Success,
    Collision,
    NearCollision,
    Timeout,
}

impl EpisodeOutcome {
    pub fn is_terminal(self) -> bool {
        self != EpisodeOutcome::Running
    }

    /// Early termination: collision or near-collision.
    pub fn is_early_termination(self) -> bool {
        matches!(self, EpisodeOutcome::Collision | EpisodeOutcome::NearCollision)
    }
}

/// Result of one environment step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
    pub outcome: EpisodeOutcome,
}

/// Environment configuration flags.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnvConfig {
    pub occlusions_enabled: bool,
    pub include_ibit: bool,
    #[serde(default)]
    pub weights: RewardWeights,
}

/// Per-conflict raw view handed to the rule-based baseline: unclamped
/// time-to-occupied of a vehicle and the ego's constant-acceleration arrival
/// time at the conflict.
#[derive(Debug, Clone, Copy)]
pub struct TimeGapPair {
    pub tto_other: f64,
    pub tto_ego: f64,
}

/// The intersection-crossing environment.
pub struct IntersectionEnv {
    scenario: Scenario,
    cfg: EnvConfig,
    world: WorldState,
    rng: ChaCha8Rng,
    occluders: Vec<OccluderPolygon>,
    last_obs: Vec<f64>,
    outcome: EpisodeOutcome,
    started: bool,
}

impl IntersectionEnv {
    pub fn new(scenario: Scenario, cfg: EnvConfig) -> Self {
        let ego = VehicleState {
            path_id: scenario.ego_path,
            s_front: scenario.ego_start,
            v: SPEED_LIMIT,
            length: VEHICLE_LENGTH,
            width: VEHICLE_WIDTH,
            is_leader: false,
        };
        Self {
            scenario,
            cfg,
            world: WorldState { t: 0.0, step_index: 0, traffic: Vec::new(), ego },
            rng: ChaCha8Rng::seed_from_u64(0),
            occluders: Vec::new(),
            last_obs: Vec::new(),
            outcome: EpisodeOutcome::Running,
            started: false,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn outcome(&self) -> EpisodeOutcome {
        self.outcome
    }

    pub fn observation_len(&self) -> usize {
        crate::encoder::observation_len(self.cfg.include_ibit)
    }

    /// Start a fresh episode: seed the RNG, sample one occluder per junction
    /// side, pre-roll traffic, place the ego at the route start at the speed
    /// limit and return the first observation.
    pub fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.outcome = EpisodeOutcome::Running;
        self.started = true;
        self.world = WorldState {
            t: -PREROLL_SECONDS,
            step_index: 0,
            traffic: Vec::new(),
            ego: VehicleState {
                path_id: self.scenario.ego_path,
                s_front: self.scenario.ego_start,
                v: SPEED_LIMIT,
                length: VEHICLE_LENGTH,
                width: VEHICLE_WIDTH,
                is_leader: false,
            },
        };

        self.occluders.clear();
        if self.cfg.occlusions_enabled {
            for side in [OccluderSide::Left, OccluderSide::Right] {
                let slots: Vec<_> = self
                    .scenario
                    .spec
                    .occluder_slots
                    .iter()
                    .filter(|s| s.side == side)
                    .collect();
                if !slots.is_empty() {
                    let pick = self.rng.gen_range(0..slots.len());
                    self.occluders.push(slots[pick].polygon.clone());
                }
            }
        }

        // Traffic-only warm-up so lanes are populated at the first step. The
        // flow-reduction clock starts at t = 0 (the ego's first step).
        let preroll_steps = (PREROLL_SECONDS / DT).round() as u32;
        for _ in 0..preroll_steps {
            self.spawn_flows();
            advance_traffic(
                &mut self.world,
                &self.scenario,
                self.scenario.spec.leader.as_ref(),
                DT,
                &mut self.rng,
            );
            self.world.t += DT;
        }
        self.world.t = 0.0;
        self.world.step_index = 0;

        if let Some(leader) = self.scenario.spec.leader.clone() {
            let speed = leader.speeds[self.rng.gen_range(0..leader.speeds.len())];
            self.world.traffic.push(VehicleState {
                path_id: self.scenario.ego_path,
                s_front: self.world.ego.s_front + leader.spawn_gap + VEHICLE_LENGTH,
                v: speed,
                length: VEHICLE_LENGTH,
                width: VEHICLE_WIDTH,
                is_leader: true,
            });
        }

        self.last_obs = self.observe();
        self.last_obs.clone()
    }

    fn spawn_flows(&mut self) {
        for (path_id, flow) in self.scenario.flows.clone() {
            if let Some(v) = spawn_step(
                &flow,
                path_id,
                &self.world.traffic,
                self.world.t,
                DT,
                &mut self.rng,
            ) {
                self.world.traffic.push(v);
            }
        }
    }

    /// Apply `action` for one step. Panics when called on a terminal episode.
    pub fn step(&mut self, action: Action) -> StepResult {
        assert!(self.started, "reset must be called first");
        assert!(!self.outcome.is_terminal(), "step on terminal episode");
        let v_pre = self.world.ego.v;
        let accel = action.accel();

        advance_ego(&mut self.world.ego, accel, DT);
        advance_traffic(
            &mut self.world,
            &self.scenario,
            self.scenario.spec.leader.as_ref(),
            DT,
            &mut self.rng,
        );
        self.spawn_flows();
        self.world.t += DT;
        self.world.step_index += 1;

        let world_outcome = detect_outcome(&self.world, &self.scenario);
        self.outcome = match world_outcome {
            Outcome::Collision => EpisodeOutcome::Collision,
            Outcome::NearCollision => EpisodeOutcome::NearCollision,
            Outcome::Success => EpisodeOutcome::Success,
            Outcome::None if self.world.step_index >= MAX_STEPS => EpisodeOutcome::Timeout,
            Outcome::None => EpisodeOutcome::Running,
        };

        let reward = self.reward(v_pre, accel, self.outcome.is_early_termination());
        self.last_obs = self.observe();
        StepResult {
            observation: self.last_obs.clone(),
            reward,
            terminal: self.outcome.is_terminal(),
            outcome: self.outcome,
        }
    }

    /// Reward of the transition: collision term from the post-step state,
    /// velocity term from the pre-step speed, acceleration term from the
    /// action.
    pub fn reward(&self, v_pre: f64, accel: f64, early_termination: bool) -> f64 {
        let w = &self.cfg.weights;
        let r_collision = if early_termination { -w.k_c } else { 0.0 };
        let r_velocity = if v_pre > w.v_upper {
            -w.k_v_upper * (v_pre - w.v_upper)
        } else if v_pre < w.v_lower {
            -w.k_v_lower * (w.v_lower - v_pre)
        } else {
            0.0
        };
        let r_accel = -w.k_a * accel.abs();
        r_collision + r_velocity + r_accel
    }

    pub fn last_observation(&self) -> &[f64] {
        &self.last_obs
    }

    /// Visible vehicles and phantoms per path, after the perception filter.
    fn perceived(&self) -> Vec<Vec<LongitudinalVehicle>> {
        let mut per_path: Vec<Vec<LongitudinalVehicle>> =
            vec![Vec::new(); self.scenario.paths.len()];
        let shadows = self.lane_shadows();
        for v in &self.world.traffic {
            let occluded = &shadows[v.path_id];
            if is_hidden(v.rear(), v.s_front, occluded) {
                continue;
            }
            per_path[v.path_id].push(LongitudinalVehicle {
                s_front: v.s_front,
                v: v.v,
                length: v.length,
            });
        }
        let limit = self.scenario.spec.speed_limit;
        for (path_id, occluded) in shadows.iter().enumerate() {
            for ph in phantoms_from_occlusion(path_id, occluded, limit) {
                per_path[path_id].push(LongitudinalVehicle {
                    s_front: ph.s_front,
                    v: ph.v,
                    length: ph.length,
                });
            }
        }
        per_path
    }

    /// Occluded lane intervals per path as seen from the ego front center.
    fn lane_shadows(&self) -> Vec<Vec<(f64, f64)>> {
        let n = self.scenario.paths.len();
        if self.occluders.is_empty() {
            return vec![Vec::new(); n];
        }
        let ego_pos = self.scenario.paths[self.scenario.ego_path]
            .pose_extrapolated(self.world.ego.s_front)
            .0;
        (0..n)
            .map(|i| {
                // Only lanes that can conflict with the ego route matter; the
                // ego's own path is never occluded for itself.
                if i == self.scenario.ego_path || self.scenario.conflicts[i].is_empty() {
                    return Vec::new();
                }
                visibility_shadow(ego_pos, &self.occluders, &self.scenario.paths[i], SHADOW_STEP)
            })
            .collect()
    }

    /// Current observation frame.
    pub fn frame(&self) -> Frame {
        let per_path = self.perceived();
        let views: Vec<PathView> = self
            .scenario
            .conflicts
            .iter()
            .enumerate()
            .map(|(i, regions)| PathView {
                regions: regions.clone(),
                vehicles: per_path[i].clone(),
            })
            .collect();
        encode(
            &views,
            self.world.ego.s_front,
            self.world.ego.v,
            self.world.ego.length,
            self.scenario.ego_goal.max(
                self.scenario.paths[self.scenario.ego_path].total_length(),
            ),
            self.cfg.include_ibit,
        )
    }

    fn observe(&self) -> Vec<f64> {
        flatten(&self.frame(), self.cfg.include_ibit)
    }

    /// Raw (tto, tto_ego) pairs for the time-gap baseline. The ego arrival
    /// time uses a constant-acceleration profile capped at `v_cap`.
    pub fn time_gap_pairs(&self, accel: f64, v_cap: f64) -> Vec<TimeGapPair> {
        let ego = &self.world.ego;
        let per_path = self.perceived();
        let mut pairs = Vec::new();
        for (path_id, regions) in self.scenario.conflicts.iter().enumerate() {
            for region in regions {
                match region.kind {
                    crate::geometry::RegionKind::Crossing => {
                        if ego.rear() > region.ego_interval.1 {
                            continue; // already crossed
                        }
                        let d_ego = (region.ego_interval.0 - ego.s_front).max(0.0);
                        let tto_ego = const_accel_arrival(ego.v, accel, v_cap, d_ego);
                        for veh in &per_path[path_id] {
                            if veh.s_front - veh.length >= region.other_interval.1 {
                                continue;
                            }
                            let d = (region.other_interval.0 - veh.s_front).max(0.0);
                            let tto_other = if veh.v <= 0.0 {
                                f64::INFINITY
                            } else {
                                d / veh.v
                            };
                            pairs.push(TimeGapPair { tto_other, tto_ego });
                        }
                    }
                    crate::geometry::RegionKind::SamePath => {
                        for veh in &per_path[path_id] {
                            let mapped_front = region.ego_interval.0
                                + (veh.s_front - region.other_interval.0);
                            let mapped_rear = mapped_front - veh.length;
                            if mapped_rear > ego.s_front {
                                // Leader: keep a time headway to its rear.
                                let tto_ego = const_accel_arrival(
                                    ego.v,
                                    accel,
                                    v_cap,
                                    mapped_rear - ego.s_front,
                                );
                                pairs.push(TimeGapPair { tto_other: 0.0, tto_ego });
                            } else if veh.s_front < region.other_interval.0
                                && ego.s_front < region.ego_interval.0
                            {
                                // Both approach the merge point.
                                let tto_other =
                                    (region.other_interval.0 - veh.s_front) / veh.v.max(1e-9);
                                let tto_ego = const_accel_arrival(
                                    ego.v,
                                    accel,
                                    v_cap,
                                    region.ego_interval.0 - ego.s_front,
                                );
                                pairs.push(TimeGapPair { tto_other, tto_ego });
                            }
                        }
                    }
                }
            }
        }
        pairs
    }

    /// One CSV line per executed step, written by rollout tracing.
    pub fn trace_header() -> &'static str {
        "t,s,v,a,reward,outcome"
    }
}

/// Time to cover distance `d` starting at speed `v0` with acceleration `a`,
/// capped at `v_cap`.
pub fn const_accel_arrival(v0: f64, a: f64, v_cap: f64, d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    if a <= 0.0 {
        return if v0 > 0.0 { d / v0 } else { f64::INFINITY };
    }
    let v0 = v0.min(v_cap);
    let d_cap = (v_cap * v_cap - v0 * v0) / (2.0 * a);
    if d <= d_cap {
        ((v0 * v0 + 2.0 * a * d).sqrt() - v0) / a
    } else {
        (v_cap - v0) / a + (d - d_cap) / v_cap
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::ScenarioLibrary;
    use approx::assert_abs_diff_eq;

    fn env(name: &str, occl: bool, ibit: bool) -> IntersectionEnv {
        let sc = ScenarioLibrary::builtin().get(name).unwrap();
        IntersectionEnv::new(
            sc,
            EnvConfig { occlusions_enabled: occl, include_ibit: ibit, weights: RewardWeights::default() },
        )
    }

    #[test]
    fn reset_is_deterministic() {
        let mut a = env("Sc02", false, false);
        let mut b = env("Sc02", false, false);
        assert_eq!(a.reset(42), b.reset(42));
    }

    #[test]
    fn observation_lengths_match_flags() {
        let mut e = env("Sc02", false, false);
        assert_eq!(e.reset(1).len(), 200);
        let mut e = env("Sc02", false, true);
        assert_eq!(e.reset(1).len(), 250);
    }

    #[test]
    fn occlusions_off_means_no_phantoms() {
        let mut e = env("Sc02", false, false);
        e.reset(3);
        let per_path = e.perceived();
        let real: usize = e.world.traffic.len();
        let seen: usize = per_path.iter().map(|v| v.len()).sum();
        assert_eq!(real, seen);
    }

    #[test]
    fn occlusions_on_adds_phantoms() {
        let mut e = env("Sc02", true, false);
        e.reset(3);
        assert_eq!(e.occluders.len(), 2);
        let shadows = e.lane_shadows();
        assert!(shadows.iter().any(|s| !s.is_empty()));
    }

    #[test]
    fn free_road_reward_zero_inside_band() {
        let e = env("Sc02", false, false);
        assert_abs_diff_eq!(e.reward(125.0 / 9.0, 0.0, false), 0.0);
    }

    #[test]
    fn reward_examples() {
        let e = env("Sc02", false, false);
        // v = 10: below band by 10/3.
        assert_abs_diff_eq!(e.reward(10.0, 0.0, false), -0.01 * (40.0 / 3.0 - 10.0), epsilon = 1e-12);
        // v = 16, accelerate.
        assert_abs_diff_eq!(
            e.reward(16.0, 3.0, false),
            -0.03 * (16.0 - 130.0 / 9.0) - 0.002 * 3.0,
            epsilon = 1e-12
        );
        // near-collision dominates.
        assert_abs_diff_eq!(e.reward(14.0, 0.0, true), -115.0, epsilon = 1e-12);
    }

    #[test]
    fn episode_times_out_at_250() {
        let mut e = env("Sc02", false, false);
        e.reset(5);
        let mut steps = 0;
        loop {
            let r = e.step(Action::Decelerate);
            steps += 1;
            if r.terminal {
                assert_eq!(r.outcome, EpisodeOutcome::Timeout);
                break;
            }
            assert!(steps <= 250);
        }
        assert_eq!(steps, 250);
    }

    #[test]
    fn observation_stays_in_unit_range() {
        let mut e = env("Sc07", false, false);
        let obs = e.reset(11);
        assert!(obs.iter().all(|&x| (0.0..=1.0).contains(&x)));
        for i in 0..60 {
            let r = e.step(if i % 3 == 0 { Action::Accelerate } else { Action::Maintain });
            assert!(r.observation.iter().all(|&x| (0.0..=1.0).contains(&x)));
            if r.terminal {
                break;
            }
        }
    }

    #[test]
    fn const_accel_arrival_profiles() {
        // Pure cruise.
        assert_abs_diff_eq!(const_accel_arrival(10.0, 3.0, 10.0, 50.0), 5.0);
        // From rest: d = 1.5 t^2.
        assert_abs_diff_eq!(const_accel_arrival(0.0, 3.0, 100.0, 6.0), 2.0);
        // Accelerate to the cap, then cruise.
        let t = const_accel_arrival(10.0, 3.0, 13.0, 100.0);
        let d_cap = (169.0 - 100.0) / 6.0;
        assert_abs_diff_eq!(t, 1.0 + (100.0 - d_cap) / 13.0, epsilon = 1e-12);
        assert_abs_diff_eq!(const_accel_arrival(5.0, 3.0, 13.0, 0.0), 0.0);
    }
}

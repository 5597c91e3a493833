//! Time-gap heuristic baseline.

use crate::constants::ACTION_ACCEL;
use crate::env::{IntersectionEnv, TimeGapPair};

use super::Policy;
use crate::env::Action;

/// Rule parameters: minimum required gap between the ego's arrival time and
/// any conflicting vehicle's arrival time, plus the cruise speed cap used
/// when projecting the ego forward under full acceleration.
#[derive(Debug, Clone, Copy)]
pub struct TtcConfig {
    pub threshold: f64,
    pub v_cap: f64,
}

impl Default for TtcConfig {
    fn default() -> Self {
        Self { threshold: 1.6, v_cap: 13.89 }
    }
}

/// Accelerate when every projected time gap clears the threshold and there is
/// speed headroom; hold speed when gaps clear but the cap is reached;
/// otherwise brake.
pub fn ttc_action(pairs: &[TimeGapPair], ego_v: f64, cfg: TtcConfig) -> Action {
    let all_clear = pairs
        .iter()
        .all(|p| (p.tto_other - p.tto_ego).abs() > cfg.threshold);
    if all_clear {
        if ego_v < cfg.v_cap {
            Action::Accelerate
        } else {
            Action::Maintain
        }
    } else {
        Action::Decelerate
    }
}

/// [`Policy`] wrapper that reads gaps from the environment's perceived state.
#[derive(Debug, Clone, Copy, Default)]
pub struct TtcPolicy {
    pub cfg: TtcConfig,
}

impl Policy for TtcPolicy {
    fn act(&mut self, env: &IntersectionEnv) -> Action {
        let pairs = env.time_gap_pairs(ACTION_ACCEL, self.cfg.v_cap);
        ttc_action(&pairs, env.world().ego.v, self.cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(other: f64, ego: f64) -> TimeGapPair {
        TimeGapPair { tto_other: other, tto_ego: ego }
    }

    #[test]
    fn empty_road_accelerates_until_cap() {
        let cfg = TtcConfig::default();
        assert_eq!(ttc_action(&[], 5.0, cfg), Action::Accelerate);
        assert_eq!(ttc_action(&[], 13.89, cfg), Action::Maintain);
    }

    #[test]
    fn tight_gap_brakes() {
        let cfg = TtcConfig::default();
        // Gap of exactly 1.6 does not clear the strict threshold.
        assert_eq!(ttc_action(&[pair(4.0, 2.4)], 5.0, cfg), Action::Decelerate);
        assert_eq!(ttc_action(&[pair(4.0, 2.39)], 5.0, cfg), Action::Accelerate);
    }

    #[test]
    fn any_tight_pair_dominates() {
        let cfg = TtcConfig::default();
        let pairs = [pair(10.0, 2.0), pair(3.0, 2.5)];
        assert_eq!(ttc_action(&pairs, 5.0, cfg), Action::Decelerate);
    }

    #[test]
    fn gap_sign_is_symmetric() {
        let cfg = TtcConfig::default();
        // Ego arrives well after the other vehicle clears.
        assert_eq!(ttc_action(&[pair(1.0, 5.0)], 5.0, cfg), Action::Accelerate);
        assert_eq!(ttc_action(&[pair(5.0, 1.0)], 5.0, cfg), Action::Accelerate);
    }
}

//! Per-step navigation reward: goal progress, heading consistency, attitude
//! stability, elevation change and proximity to cover, plus an optional
//! end-of-episode normalization.

use crate::error::{Error, Result};
use crate::geom::wrap_angle;
use crate::perception::inf_f64;
use serde::{Deserialize, Serialize};

/// Reward assigned when the robot is closer to cover than half its width.
pub const COVER_CONTACT_PENALTY: f64 = -1000.0;

/// Everything the reward needs about one transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepContext {
    /// Goal distance before the step.
    pub d_prev: f64,
    /// Goal distance after the step.
    pub d_cur: f64,
    pub theta_prev: f64,
    pub theta_cur: f64,
    pub roll: f64,
    pub pitch: f64,
    /// Elevations at previous positions, most recent first.
    pub elevation_history: Vec<f64>,
    pub h_cur: f64,
    /// Distance to the nearest cover object, infinite when none is known.
    #[serde(with = "inf_f64")]
    pub d_cover: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentScales {
    pub goal: f64,
    pub dir: f64,
    pub stab: f64,
    pub elev: f64,
    pub cover: f64,
}

impl Default for ComponentScales {
    fn default() -> Self {
        Self { goal: 1.0, dir: 1.0, stab: 1.0, elev: 1.0, cover: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    /// Weight on each |dh_i|; negative penalizes elevation change.
    pub w_elev: f64,
    /// Number of previous positions in the elevation term.
    pub n_history: usize,
    /// Shortest external dimension of the robot (m).
    pub w_min: f64,
    pub component_scales: ComponentScales,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { w_elev: -1.0, n_history: 5, w_min: 0.67, component_scales: ComponentScales::default() }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        if self.n_history < 1 {
            return Err(Error::InvalidConfig("n_history must be at least 1".into()));
        }
        if self.w_min.is_nan() || self.w_min <= 0.0 {
            return Err(Error::InvalidConfig(format!("w_min must be positive, got {}", self.w_min)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_goal: f64,
    pub r_dir: f64,
    pub r_stab: f64,
    pub r_elev: f64,
    pub r_cover: f64,
    pub total: f64,
}

/// Progress toward the goal: d_prev - d_cur.
pub fn r_goal(d_prev: f64, d_cur: f64) -> f64 {
    d_prev - d_cur
}

/// Negative absolute heading change, measured across the +-pi seam.
pub fn r_dir(theta_cur: f64, theta_prev: f64) -> f64 {
    -wrap_angle(theta_cur - theta_prev).abs()
}

/// exp(-(roll^2 + pitch^2))
pub fn r_stab(roll: f64, pitch: f64) -> f64 {
    (-(roll * roll + pitch * pitch)).exp()
}

pub fn r_elev(ctx: &StepContext, weights: &RewardWeights) -> Result<f64> {
    if ctx.elevation_history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    Ok(ctx.elevation_history.iter().take(weights.n_history).map(|h_i| weights.w_elev * (ctx.h_cur - h_i).abs()).sum())
}

/// Piecewise cover term: nothing beyond 1.5 w_min, `d - 0.5 w_min` inside
/// [0.5 w_min, 1.5 w_min], and a contact penalty below.
pub fn r_cover(d_cover: f64, w_min: f64) -> f64 {
    if d_cover > 1.5 * w_min {
        0.0
    } else if d_cover >= 0.5 * w_min {
        d_cover - 0.5 * w_min
    } else {
        COVER_CONTACT_PENALTY
    }
}

pub fn total_reward(ctx: &StepContext, weights: &RewardWeights) -> Result<RewardBreakdown> {
    let s = &weights.component_scales;
    let r_goal = r_goal(ctx.d_prev, ctx.d_cur);
    let r_dir = r_dir(ctx.theta_cur, ctx.theta_prev);
    let r_stab = r_stab(ctx.roll, ctx.pitch);
    let r_elev = r_elev(ctx, weights)?;
    let r_cover = r_cover(ctx.d_cover, weights.w_min);
    let total = s.goal * r_goal + s.dir * r_dir + s.stab * r_stab + s.elev * r_elev + s.cover * r_cover;
    Ok(RewardBreakdown { r_goal, r_dir, r_stab, r_elev, r_cover, total })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConfig {
    pub enabled: bool,
    /// Weight of the terminal visibility penalty.
    pub lambda: f64,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self { enabled: false, lambda: 0.0 }
    }
}

/// Divides every step reward by `max(1, max_cover)` and subtracts
/// `lambda * visibility` from the last one. Identity when disabled.
pub fn normalize_episode(
    step_rewards: &[f64],
    max_cover: f64,
    visibility: f64,
    cfg: &NormalizationConfig,
) -> Result<Vec<f64>> {
    if !cfg.enabled {
        return Ok(step_rewards.to_vec());
    }
    let denom = max_cover.max(1.0);
    if !(denom.is_finite() && denom > 0.0) || max_cover.is_nan() {
        return Err(Error::DegenerateNormalizer(max_cover));
    }
    let mut out: Vec<f64> = step_rewards.iter().map(|r| r / denom).collect();
    if let Some(last) = out.last_mut() {
        *last -= cfg.lambda * visibility;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> StepContext {
        StepContext {
            d_prev: 3.0,
            d_cur: 3.0,
            theta_prev: 0.4,
            theta_cur: 0.4,
            roll: 0.0,
            pitch: 0.0,
            elevation_history: vec![0.0; 5],
            h_cur: 0.0,
            d_cover: f64::INFINITY,
        }
    }

    #[test]
    fn goal_examples() {
        assert!((r_goal(5.0, 4.2) - 0.8).abs() < 1e-12);
        assert_eq!(r_goal(3.0, 3.0), 0.0);
        assert!((r_goal(2.0, 2.6) + 0.6).abs() < 1e-12);
    }

    #[test]
    fn dir_examples() {
        assert!((r_dir(0.5, 0.3) + 0.2).abs() < 1e-12);
        assert_eq!(r_dir(1.1, 1.1), 0.0);
        // 2*pi - 6.2 = 0.0831853...
        assert!((r_dir(3.1, -3.1) + 0.083185307179586).abs() < 1e-12);
    }

    #[test]
    fn stab_examples() {
        assert_eq!(r_stab(0.0, 0.0), 1.0);
        assert!((r_stab(1.0, 0.0) - 0.367879441171442).abs() < 1e-12);
        assert!((r_stab(0.6, 0.8) - 0.367879441171442).abs() < 1e-12);
    }

    #[test]
    fn elev_examples() {
        let w = RewardWeights::default();
        assert_eq!(r_elev(&ctx(), &w).unwrap(), 0.0);
        let c = StepContext { elevation_history: vec![0.0, 0.5], h_cur: 1.0, ..ctx() };
        let w1 = RewardWeights { w_elev: -1.0, ..Default::default() };
        assert_eq!(r_elev(&c, &w1).unwrap(), -1.5);
        let w2 = RewardWeights { w_elev: 1.0, ..Default::default() };
        assert_eq!(r_elev(&c, &w2).unwrap(), 1.5);
        let empty = StepContext { elevation_history: vec![], ..ctx() };
        assert_eq!(r_elev(&empty, &w), Err(Error::EmptyHistory));
        assert_eq!(total_reward(&empty, &w), Err(Error::EmptyHistory));
    }

    #[test]
    fn elev_uses_only_n_most_recent() {
        let c = StepContext { elevation_history: vec![1.0, 2.0, 3.0], h_cur: 0.0, ..ctx() };
        let w = RewardWeights { n_history: 2, ..Default::default() };
        assert_eq!(r_elev(&c, &w).unwrap(), -3.0);
    }

    #[test]
    fn cover_examples() {
        assert_eq!(r_cover(2.0, 0.67), 0.0);
        assert!((r_cover(0.67, 0.67) - 0.335).abs() < 1e-12);
        assert_eq!(r_cover(0.2, 0.67), -1000.0);
        assert_eq!(r_cover(0.335, 0.67), 0.0);
        assert_eq!(r_cover(f64::INFINITY, 0.67), 0.0);
    }

    #[test]
    fn cover_breakpoints() {
        let w = 0.67;
        let (lo, hi) = (0.5 * w, 1.5 * w);
        assert_eq!(r_cover(lo, w), 0.0);
        assert_eq!(r_cover(lo - 1e-12, w), -1000.0);
        assert!(r_cover(lo + 1e-12, w) > 0.0);
        assert_eq!(r_cover(hi, w), hi - lo);
        assert_eq!(r_cover(hi + 1e-12, w), 0.0);
    }

    #[test]
    fn total_examples() {
        let w = RewardWeights::default();
        assert_eq!(total_reward(&ctx(), &w).unwrap().total, 1.0);

        let c = StepContext {
            d_prev: 5.0,
            d_cur: 4.2,
            theta_prev: 0.3,
            theta_cur: 0.5,
            roll: 1.0,
            pitch: 0.0,
            elevation_history: vec![0.0, 0.5],
            h_cur: 1.0,
            d_cover: 0.67,
        };
        let b = total_reward(&c, &w).unwrap();
        assert!((b.total - -0.197121).abs() < 1e-6, "{}", b.total);

        let doubled = RewardWeights {
            component_scales: ComponentScales { goal: 2.0, dir: 2.0, stab: 2.0, elev: 2.0, cover: 2.0 },
            ..Default::default()
        };
        assert_eq!(total_reward(&c, &doubled).unwrap().total, 2.0 * b.total);
    }

    #[test]
    fn normalization() {
        let on = NormalizationConfig { enabled: true, lambda: 0.0 };
        let rewards = [1.0, -2.0, 0.5];
        assert_eq!(normalize_episode(&rewards, 7.0, 0.3, &NormalizationConfig::default()).unwrap(), rewards);
        assert_eq!(normalize_episode(&[0.0; 4], 3.0, 0.0, &on).unwrap(), vec![0.0; 4]);
        assert_eq!(normalize_episode(&rewards, 2.0, 0.0, &on).unwrap(), vec![0.5, -1.0, 0.25]);
        assert_eq!(normalize_episode(&rewards, 0.5, 0.0, &on).unwrap(), rewards);
        let with_vis = NormalizationConfig { enabled: true, lambda: 2.0 };
        assert_eq!(normalize_episode(&rewards, 2.0, 0.25, &with_vis).unwrap(), vec![0.5, -1.0, -0.25]);
        assert!(matches!(normalize_episode(&rewards, f64::INFINITY, 0.0, &on), Err(Error::DegenerateNormalizer(_))));
        assert!(matches!(normalize_episode(&rewards, f64::NAN, 0.0, &on), Err(Error::DegenerateNormalizer(_))));
    }

    proptest! {
        #[test]
        fn stab_in_unit_interval(roll in -3.0f64..3.0, pitch in -3.0f64..3.0) {
            let r = r_stab(roll, pitch);
            prop_assert!(r > 0.0 && r <= 1.0);
        }

        #[test]
        fn dir_never_positive(a in -3.1f64..3.1, b in -3.1f64..3.1) {
            prop_assert!(r_dir(a, b) <= 0.0);
            prop_assert_eq!(r_dir(a, a), 0.0);
            prop_assert_eq!(r_dir(a + std::f64::consts::TAU, a).abs() < 1e-12, true);
        }

        #[test]
        fn total_is_sum(
            dp in 0.0f64..15.0, dc in 0.0f64..15.0, tp in -3.0f64..3.0, tc in -3.0f64..3.0,
            roll in -0.5f64..0.5, pitch in -0.5f64..0.5, hs in proptest::collection::vec(-3.0f64..3.0, 1..6),
            h in -3.0f64..3.0, dcov in 0.0f64..3.0,
        ) {
            let c = StepContext { d_prev: dp, d_cur: dc, theta_prev: tp, theta_cur: tc, roll, pitch, elevation_history: hs, h_cur: h, d_cover: dcov };
            let b = total_reward(&c, &RewardWeights::default()).unwrap();
            prop_assert_eq!(b.total, b.r_goal + b.r_dir + b.r_stab + b.r_elev + b.r_cover);
        }
    }
}

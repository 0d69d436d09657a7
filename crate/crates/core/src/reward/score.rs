use serde::Serialize;
use thiserror::Error;

use crate::board::Move;
use crate::dataset::{SituationLabel3, SituationLabel5};
use crate::engine::ScoredMoveSet;
use crate::reward::ModelResponse;

pub const ADVANTAGE_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Granularity {
    Three,
    #[default]
    Five,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct MoveReward {
    pub r_legal: u8,
    pub r_good: u8,
    pub r_best: u8,
    pub r_move: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct RewardBreakdown {
    pub r_legal: u8,
    pub r_good: u8,
    pub r_best: u8,
    pub r_move: u8,
    pub r_analysis: u8,
    pub r_format: u8,
    pub total: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewardConfig {
    pub sigma_good: i32,
    pub granularity: Granularity,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig { sigma_good: 100, granularity: Granularity::Five }
    }
}

/// A move counts only if it is fully legal in the scored position.
pub fn reward_move(scored: &ScoredMoveSet, mv: Option<Move>, sigma_good: i32) -> MoveReward {
    let Some(mv) = mv.filter(|&m| scored.contains(m)) else {
        return MoveReward::default();
    };
    let good = scored.is_good(mv, sigma_good).unwrap_or(false) as u8;
    let best = scored.is_best(mv) as u8;
    MoveReward { r_legal: 1, r_good: good, r_best: best, r_move: 1 + good + best }
}

pub fn reward_analysis(
    predicted5: Option<SituationLabel5>,
    predicted3: Option<SituationLabel3>,
    truth: SituationLabel5,
    granularity: Granularity,
) -> u8 {
    let hit = match granularity {
        Granularity::Five => predicted5 == Some(truth),
        Granularity::Three => predicted3.or(predicted5.map(|l| l.coarsen())) == Some(truth.coarsen()),
    };
    hit as u8
}

/// Everything is zero when the response breaks the required layout.
pub fn total_reward(
    response: &ModelResponse,
    scored: &ScoredMoveSet,
    truth: SituationLabel5,
    config: &RewardConfig,
) -> RewardBreakdown {
    if !response.format_ok {
        return RewardBreakdown::default();
    }
    let m = reward_move(scored, response.mv, config.sigma_good);
    let analysis = reward_analysis(response.predicted_label5, response.predicted_label3, truth, config.granularity);
    RewardBreakdown {
        r_legal: m.r_legal,
        r_good: m.r_good,
        r_best: m.r_best,
        r_move: m.r_move,
        r_analysis: analysis,
        r_format: 1,
        total: m.r_move + analysis + 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AdvantageError {
    #[error("a group needs at least two rewards, got {0}")]
    GroupTooSmall(usize),
}

/// `(r - mean) / (std + 1e-8)` with the population standard deviation;
/// a group with no spread gets all zeros.
pub fn group_relative_advantage(rewards: &[f64]) -> Result<Vec<f64>, AdvantageError> {
    if rewards.len() < 2 {
        return Err(AdvantageError::GroupTooSmall(rewards.len()));
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return Ok(vec![0.0; rewards.len()]);
    }
    Ok(rewards.iter().map(|r| (r - mean) / (std + ADVANTAGE_EPSILON)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Position;
    use crate::engine::ScoredMove;
    use crate::movegen::legal_moves;
    use crate::notation::parse_iccs;
    use crate::reward::{parse_response, ResponseFormat};
    use proptest::prelude::*;

    /// Start position with h2e2 best at 50, b0c2 at -40, c3c4 at -60, the rest at -500.
    fn fixture() -> ScoredMoveSet {
        let p = Position::start();
        let entries = legal_moves(&p)
            .into_iter()
            .map(|mv| {
                let value = match mv.to_string().as_str() {
                    "h2e2" => 50,
                    "b0c2" => -40,
                    "c3c4" => -60,
                    _ => -500,
                };
                ScoredMove { mv, value }
            })
            .collect();
        ScoredMoveSet::new(&p, entries, 1).unwrap()
    }

    fn mv(s: &str) -> Option<Move> {
        Some(parse_iccs(s).unwrap())
    }

    #[test]
    fn move_lattice() {
        let s = fixture();
        assert_eq!(reward_move(&s, mv("h2e2"), 100).r_move, 3);
        assert_eq!(reward_move(&s, mv("b0c2"), 100), MoveReward { r_legal: 1, r_good: 1, r_best: 0, r_move: 2 });
        assert_eq!(reward_move(&s, mv("c3c4"), 100).r_move, 1);
        assert_eq!(reward_move(&s, mv("a0a1"), 100).r_move, 1);
        assert_eq!(reward_move(&s, mv("a0a5"), 100), MoveReward::default());
        assert_eq!(reward_move(&s, None, 100), MoveReward::default());
    }

    #[test]
    fn analysis_granularity() {
        use SituationLabel5::*;
        assert_eq!(reward_analysis(Some(SlightAdvRed), None, ClearAdvRed, Granularity::Three), 1);
        assert_eq!(reward_analysis(Some(SlightAdvRed), None, ClearAdvRed, Granularity::Five), 0);
        assert_eq!(reward_analysis(None, None, Balanced, Granularity::Five), 0);
        assert_eq!(reward_analysis(None, Some(SituationLabel3::AdvRed), ClearAdvRed, Granularity::Three), 1);
        assert_eq!(reward_analysis(None, Some(SituationLabel3::AdvRed), ClearAdvRed, Granularity::Five), 0);
    }

    #[test]
    fn totals_and_gate() {
        let s = fixture();
        let cfg = RewardConfig::default();
        let good = parse_response("<Think>t</Think><Answer>Situation Analysis: Balanced\nBest Move: h2e2</Answer>", ResponseFormat::Tagged);
        assert_eq!(total_reward(&good, &s, SituationLabel5::Balanced, &cfg).total, 5);
        let bad = parse_response("Best Move: h2e2 <Answer>Situation Analysis: Balanced</Answer>", ResponseFormat::Tagged);
        assert_eq!(total_reward(&bad, &s, SituationLabel5::Balanced, &cfg), RewardBreakdown::default());
        let illegal = parse_response("<Think>t</Think><Answer>Situation Analysis: balanced\nBest Move: a0a5</Answer>", ResponseFormat::Tagged);
        let r = total_reward(&illegal, &s, SituationLabel5::ClearAdvRed, &cfg);
        assert_eq!((r.r_move, r.r_analysis, r.r_format, r.total), (0, 0, 1, 1));
    }

    #[test]
    fn advantages() {
        let a = group_relative_advantage(&[1.0, 2.0, 3.0, 2.0]).unwrap();
        let want = [-std::f64::consts::SQRT_2, 0.0, std::f64::consts::SQRT_2, 0.0];
        for (x, y) in a.iter().zip(want) {
            assert!((x - y).abs() < 1e-3);
        }
        assert_eq!(group_relative_advantage(&[2.0, 2.0, 2.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(group_relative_advantage(&[1.0]), Err(AdvantageError::GroupTooSmall(1)));
    }

    proptest! {
        #[test]
        fn advantages_are_centred(rs in prop::collection::vec(-10.0f64..10.0, 2..40)) {
            let a = group_relative_advantage(&rs).unwrap();
            prop_assert!(a.iter().sum::<f64>().abs() <= 1e-9 * rs.len() as f64);
        }

        #[test]
        fn breakdown_lattice(idx in 0usize..44, raw_ok in any::<bool>(), label in 0usize..5, truth in 0usize..5) {
            let s = fixture();
            let m = s.entries()[idx].mv;
            let text = format!(
                "<Think>t</Think><Answer>Situation Analysis: {}\nBest Move: {m}</Answer>{}",
                SituationLabel5::ALL[label].phrase(),
                if raw_ok { "" } else { "!" }
            );
            let r = total_reward(&parse_response(&text, ResponseFormat::Tagged), &s, SituationLabel5::ALL[truth], &RewardConfig::default());
            prop_assert!(r.r_best <= r.r_good && r.r_good <= r.r_legal);
            prop_assert_eq!(r.r_move, r.r_legal + r.r_good + r.r_best);
            if r.r_format == 0 {
                prop_assert_eq!(r, RewardBreakdown::default());
            } else {
                prop_assert_eq!(r.total, r.r_move + r.r_analysis + 1);
            }
        }
    }
}

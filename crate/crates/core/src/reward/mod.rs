//! Response parsing, training rewards and benchmark metrics.

mod metrics;
mod response;
mod score;
mod transcript;

pub use metrics::{
    compute_metrics, render_report, ClassGating, EvalItem, GroupBy, Metric, MetricCell, MetricValue,
    MetricsConfig, MetricsError, MetricsReport, PieceCountCell, PieceKindCell,
};
pub use response::{first_iccs_token, match_label, parse_response, LabelMatch, ModelResponse, ResponseFormat, LABEL_SYNONYMS};
pub use score::{
    group_relative_advantage, reward_analysis, reward_move, total_reward, AdvantageError, Granularity, MoveReward,
    RewardBreakdown, RewardConfig, ADVANTAGE_EPSILON,
};
pub use transcript::{join_transcripts, read_jsonl, Joined, TranscriptError, TranscriptRecord};

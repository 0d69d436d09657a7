//! @k benchmark metrics over sampled responses, with breakdowns by piece
//! count and by the kind of piece moved.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::board::PieceKind;
use crate::dataset::SituationLabel5;
use crate::engine::ScoredMoveSet;
use crate::reward::ModelResponse;

/// One test position with what is known to be true about it.
#[derive(Debug, Clone)]
pub struct EvalItem {
    pub scored: ScoredMoveSet,
    pub truth: SituationLabel5,
    pub piece_count: usize,
}

/// How class metrics treat the legality requirement at k > 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassGating {
    /// One response must carry both a legal move and the right label.
    #[default]
    JointPerResponse,
    /// Score the label of the first legal response among the first k.
    FirstLegal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricsConfig {
    pub ks: Vec<usize>,
    pub sigma_good: i32,
    #[serde(skip)]
    pub gating: ClassGating,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { ks: vec![1, 3], sigma_good: 100, gating: ClassGating::JointPerResponse }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("position {position} has {have} responses, {need} needed")]
    InsufficientSamples { position: usize, have: usize, need: usize },
    #[error("{items} positions but {responses} response lists")]
    LengthMismatch { items: usize, responses: usize },
    #[error("no k values given")]
    NoKs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Legal,
    Good,
    Best,
    Class3,
    Class5,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Legal, Metric::Good, Metric::Best, Metric::Class3, Metric::Class5];

    pub fn column(self, k: usize) -> String {
        match self {
            Metric::Legal => format!("legal@{k}"),
            Metric::Good => format!("good@{k}"),
            Metric::Best => format!("best@{k}"),
            Metric::Class3 => format!("3-class@{k}"),
            Metric::Class5 => format!("5-class@{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricValue {
    pub column: String,
    pub metric: Metric,
    pub k: usize,
    pub hits: usize,
    pub value: f64,
}

/// Metrics over a set of positions, columns in table order: each metric at
/// every k before the next metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricCell {
    pub positions: usize,
    pub values: Vec<MetricValue>,
}

impl MetricCell {
    pub fn get(&self, metric: Metric, k: usize) -> Option<&MetricValue> {
        self.values.iter().find(|v| v.metric == metric && v.k == k)
    }

    pub fn value(&self, metric: Metric, k: usize) -> Option<f64> {
        self.get(metric, k).map(|v| v.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceCountCell {
    pub piece_count: usize,
    #[serde(flatten)]
    pub cell: MetricCell,
}

/// Per-response success rates for legal responses that move one kind of
/// piece.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceKindCell {
    pub kind: PieceKind,
    pub responses: usize,
    pub good: usize,
    pub best: usize,
    pub class3: usize,
    pub class5: usize,
    pub good_rate: f64,
    pub best_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub ks: Vec<usize>,
    pub overall: MetricCell,
    pub by_piece_count: Vec<PieceCountCell>,
    pub by_piece_kind: Vec<PieceKindCell>,
    /// Responses among the first max(k) without a legal move.
    pub unattributed_responses: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    legal: bool,
    good: bool,
    best: bool,
    label3: bool,
    label5: bool,
    kind: Option<PieceKind>,
}

fn judge(item: &EvalItem, r: &ModelResponse, sigma_good: i32) -> Outcome {
    let label5 = r.predicted_label5 == Some(item.truth);
    let label3 = r.predicted_label3.or(r.predicted_label5.map(|l| l.coarsen())) == Some(item.truth.coarsen());
    let Some(mv) = r.mv.filter(|&m| item.scored.contains(m)) else {
        return Outcome { label3, label5, ..Default::default() };
    };
    Outcome {
        legal: true,
        good: item.scored.is_good(mv, sigma_good).unwrap_or(false),
        best: item.scored.is_best(mv),
        label3,
        label5,
        kind: item.scored.position().piece_at(mv.from).map(|p| p.kind),
    }
}

fn hit(outcomes: &[Outcome], metric: Metric, gating: ClassGating) -> bool {
    let class = |o: &Outcome| if metric == Metric::Class3 { o.label3 } else { o.label5 };
    match metric {
        Metric::Legal => outcomes.iter().any(|o| o.legal),
        Metric::Good => outcomes.iter().any(|o| o.good),
        Metric::Best => outcomes.iter().any(|o| o.best),
        Metric::Class3 | Metric::Class5 => match gating {
            ClassGating::JointPerResponse => outcomes.iter().any(|o| o.legal && class(o)),
            ClassGating::FirstLegal => outcomes.iter().find(|o| o.legal).is_some_and(class),
        },
    }
}

fn cell(judged: &[&Vec<Outcome>], config: &MetricsConfig) -> MetricCell {
    let n = judged.len();
    let mut values = Vec::new();
    for metric in Metric::ALL {
        for &k in &config.ks {
            let hits = judged.iter().filter(|o| hit(&o[..k], metric, config.gating)).count();
            values.push(MetricValue {
                column: metric.column(k),
                metric,
                k,
                hits,
                value: if n == 0 { 0.0 } else { hits as f64 / n as f64 },
            });
        }
    }
    MetricCell { positions: n, values }
}

/// Each position's first k responses count toward metric@k.
pub fn compute_metrics(
    items: &[EvalItem],
    responses: &[Vec<ModelResponse>],
    config: &MetricsConfig,
) -> Result<MetricsReport, MetricsError> {
    if items.len() != responses.len() {
        return Err(MetricsError::LengthMismatch { items: items.len(), responses: responses.len() });
    }
    let max_k = *config.ks.iter().max().ok_or(MetricsError::NoKs)?;
    for (i, rs) in responses.iter().enumerate() {
        if rs.len() < max_k {
            return Err(MetricsError::InsufficientSamples { position: i, have: rs.len(), need: max_k });
        }
    }
    let judged: Vec<Vec<Outcome>> = items
        .iter()
        .zip(responses)
        .map(|(item, rs)| rs[..max_k].iter().map(|r| judge(item, r, config.sigma_good)).collect())
        .collect();

    let overall = cell(&judged.iter().collect::<Vec<_>>(), config);

    let mut groups: BTreeMap<usize, Vec<&Vec<Outcome>>> = BTreeMap::new();
    for (item, o) in items.iter().zip(&judged) {
        groups.entry(item.piece_count).or_default().push(o);
    }
    let by_piece_count = groups.into_iter().map(|(piece_count, os)| PieceCountCell { piece_count, cell: cell(&os, config) }).collect();

    let mut kinds: BTreeMap<PieceKind, PieceKindCell> = BTreeMap::new();
    let mut unattributed = 0;
    for o in judged.iter().flatten() {
        let Some(kind) = o.kind else {
            unattributed += 1;
            continue;
        };
        let c = kinds.entry(kind).or_insert(PieceKindCell {
            kind,
            responses: 0,
            good: 0,
            best: 0,
            class3: 0,
            class5: 0,
            good_rate: 0.0,
            best_rate: 0.0,
        });
        c.responses += 1;
        c.good += o.good as usize;
        c.best += o.best as usize;
        c.class3 += o.label3 as usize;
        c.class5 += o.label5 as usize;
    }
    let by_piece_kind = kinds
        .into_values()
        .map(|mut c| {
            c.good_rate = c.good as f64 / c.responses as f64;
            c.best_rate = c.best as f64 / c.responses as f64;
            c
        })
        .collect();

    Ok(MetricsReport { ks: config.ks.clone(), overall, by_piece_count, by_piece_kind, unattributed_responses: unattributed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroupBy {
    #[default]
    None,
    PieceCount,
    PieceKind,
}

fn row(out: &mut String, name: &str, c: &MetricCell) {
    let _ = write!(out, "{name:<12} {:>5}", c.positions);
    for v in &c.values {
        let _ = write!(out, " {:>10.4}", v.value);
    }
    out.push('\n');
}

/// Fixed-width text table: one row per cell, one column per metric@k.
pub fn render_report(report: &MetricsReport, group_by: GroupBy) -> String {
    let mut out = String::new();
    if group_by == GroupBy::PieceKind {
        let _ = writeln!(out, "{:<12} {:>9} {:>10} {:>10}", "piece", "responses", "good", "best");
        for c in &report.by_piece_kind {
            let _ = writeln!(out, "{:<12} {:>9} {:>10.4} {:>10.4}", c.kind.name(), c.responses, c.good_rate, c.best_rate);
        }
        let _ = writeln!(out, "{:<12} {:>9}", "no move", report.unattributed_responses);
        return out;
    }
    let _ = write!(out, "{:<12} {:>5}", "group", "n");
    for v in &report.overall.values {
        let _ = write!(out, " {:>10}", v.column);
    }
    out.push('\n');
    row(&mut out, "overall", &report.overall);
    if group_by == GroupBy::PieceCount {
        for c in &report.by_piece_count {
            row(&mut out, &format!("pieces={}", c.piece_count), &c.cell);
        }
    }
    out
}

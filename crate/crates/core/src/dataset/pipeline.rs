use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Color, Move, Position};
use crate::dataset::filter::{extract_triplets, filter_comment, Sanitizer, SanitizerError, Triplet};
use crate::dataset::labels::{classify_situation, coarsen_to_3class, SituationLabel3, SituationLabel5};
use crate::engine::{map_positions, EngineError, EntryRecord, Evaluation, OracleSpec, ScoredMoveSet, ScoredRecord, ScoredSetError};
use crate::notation::{move_to_iccs, to_fen, GameResult, PgnBatch};

/// Which value labels a commented sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelSource {
    /// The evaluation of the position the comment is written about.
    #[default]
    PreMove,
    /// The value of the played move.
    PostMove,
}

/// What happens to a comment when the sanitizer cannot be reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SanitizerFailure {
    #[default]
    Drop,
    KeepRaw,
    Abort,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub sigma_good: i32,
    pub sigma_s: i32,
    pub sigma_l: i32,
    pub keywords: Vec<String>,
    pub seed: u64,
    /// Share of good commented samples routed to stage 3.
    pub stage3_fraction: f64,
    /// Test positions wanted per piece count, split evenly between sides.
    pub test_per_piece_count: usize,
    pub test_piece_counts: RangeInclusive<usize>,
    pub label_source: LabelSource,
    pub on_sanitizer_failure: SanitizerFailure,
    pub jobs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sigma_good: 100,
            sigma_s: 100,
            sigma_l: 800,
            keywords: super::default_keywords(),
            seed: 0,
            stage3_fraction: 0.5,
            test_per_piece_count: 100,
            test_piece_counts: 5..=32,
            label_source: LabelSource::PreMove,
            on_sanitizer_failure: SanitizerFailure::Drop,
            jobs: 1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::InvalidConfig(m.to_owned()));
        if self.sigma_good < 0 {
            return bad("sigma_good must not be negative");
        }
        if !(0 <= self.sigma_s && self.sigma_s < self.sigma_l) {
            return bad("thresholds must satisfy 0 <= sigma_s < sigma_l");
        }
        if !(0.0..=1.0).contains(&self.stage3_fraction) {
            return bad("stage3_fraction must lie in [0, 1]");
        }
        if self.test_per_piece_count % 2 != 0 {
            return bad("test_per_piece_count must be even");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Sanitizer(#[from] SanitizerError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

/// A parsed input file.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub batch: PgnBatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage1Record {
    pub fen: String,
    #[serde(rename = "move")]
    pub mv: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage2Record {
    pub fen: String,
    #[serde(rename = "move")]
    pub mv: String,
    pub comment: String,
    pub label5: SituationLabel5,
    pub label3: SituationLabel3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage3Record {
    pub fen: String,
    #[serde(rename = "move")]
    pub mv: String,
    pub comment: String,
    pub label5: SituationLabel5,
    pub label3: SituationLabel3,
    pub scored: Vec<EntryRecord>,
    pub best_value: i32,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestRecord {
    pub fen: String,
    pub label5: SituationLabel5,
    pub label3: SituationLabel3,
    pub scored: Vec<EntryRecord>,
    pub best_value: i32,
    pub depth: u32,
    pub piece_count: usize,
    pub side: Color,
}

impl TestRecord {
    pub fn scored_set(&self) -> Result<ScoredMoveSet, ScoredSetError> {
        ScoredMoveSet::from_record(&ScoredRecord { fen: self.fen.clone(), entries: self.scored.clone(), depth: self.depth })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectRecord {
    pub source: String,
    pub game_index: usize,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub piece_count: usize,
    pub side: Color,
    pub wanted: usize,
    pub got: usize,
}

/// Counts at every filtering step. Each stage's input equals the sum of its
/// outputs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Funnel {
    pub games_total: usize,
    pub games_rejected_parse: usize,
    pub games_rejected_replay: usize,
    pub games_unknown_result: usize,
    pub games_used: usize,
    pub plies_total: usize,
    pub plies_loser_dropped: usize,
    pub plies_unknown_result: usize,
    pub plies_retained: usize,
    pub comments_on_retained: usize,
    pub comments_no_keyword: usize,
    pub comments_sanitizer_dropped: usize,
    pub comments_kept: usize,
    pub commented_scoring_failed: usize,
    pub commented_not_good: usize,
    pub commented_good: usize,
    pub stage1: usize,
    pub stage2: usize,
    pub stage3: usize,
    pub test_candidates: usize,
    pub test_selected: usize,
    pub test_scoring_failed: usize,
    pub test: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOutput {
    pub stage1: Vec<Stage1Record>,
    pub stage2: Vec<Stage2Record>,
    pub stage3: Vec<Stage3Record>,
    pub test: Vec<TestRecord>,
    pub rejects: Vec<RejectRecord>,
    pub shortfalls: Vec<Shortfall>,
    pub funnel: Funnel,
}

/// Whether `mv` is within `sigma_good` of the best value in `scored`.
pub fn is_good_move(scored: &ScoredMoveSet, mv: Move, sigma_good: i32) -> Result<bool, ScoredSetError> {
    scored.is_good(mv, sigma_good)
}

struct Sample {
    source: usize,
    game_index: usize,
    triplet: Triplet,
    fen: String,
}

struct Commented {
    sample: usize,
    comment: String,
}

type Scoring = (Evaluation, ScoredMoveSet);

pub fn build_stage_files(
    sources: &[Source],
    config: &PipelineConfig,
    oracle: &OracleSpec,
    sanitizer: &dyn Sanitizer,
) -> Result<PipelineOutput, PipelineError> {
    config.validate()?;
    let mut out = PipelineOutput::default();
    let funnel = &mut out.funnel;

    let mut samples: Vec<Sample> = Vec::new();
    for (si, source) in sources.iter().enumerate() {
        funnel.games_total += source.batch.games.len() + source.batch.rejects.len();
        funnel.games_rejected_parse += source.batch.rejects.len();
        for r in &source.batch.rejects {
            out.rejects.push(RejectRecord {
                source: source.name.clone(),
                game_index: r.game_index,
                reason: r.reason.code().to_owned(),
                detail: serde_json::to_string(&r.reason).ok(),
            });
        }
        for game in &source.batch.games {
            let triplets = match extract_triplets(game) {
                Ok(t) => t,
                Err(e) => {
                    funnel.games_rejected_replay += 1;
                    out.rejects.push(RejectRecord {
                        source: source.name.clone(),
                        game_index: game.index,
                        reason: "illegal_ply".into(),
                        detail: Some(e.to_string()),
                    });
                    continue;
                }
            };
            funnel.plies_total += game.plies.len();
            if game.result == GameResult::Unknown {
                funnel.games_unknown_result += 1;
                funnel.plies_unknown_result += game.plies.len();
                out.rejects.push(RejectRecord {
                    source: source.name.clone(),
                    game_index: game.index,
                    reason: "unknown_result".into(),
                    detail: None,
                });
                continue;
            }
            funnel.games_used += 1;
            funnel.plies_loser_dropped += game.plies.len() - triplets.len();
            funnel.plies_retained += triplets.len();
            for triplet in triplets {
                let fen = to_fen(&triplet.position);
                samples.push(Sample { source: si, game_index: game.index, triplet, fen });
            }
        }
    }
    out.stage1 = samples.iter().map(|s| Stage1Record { fen: s.fen.clone(), mv: move_to_iccs(s.triplet.mv) }).collect();
    funnel.stage1 = out.stage1.len();

    let mut commented = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        let Some(raw) = &s.triplet.comment else { continue };
        funnel.comments_on_retained += 1;
        let kept = match filter_comment(raw, &config.keywords, sanitizer) {
            Ok(k) => k,
            Err(e) => match config.on_sanitizer_failure {
                SanitizerFailure::Drop => None,
                SanitizerFailure::KeepRaw => Some(raw.clone()),
                SanitizerFailure::Abort => return Err(e.into()),
            },
        };
        match kept {
            Some(comment) => {
                funnel.comments_kept += 1;
                commented.push(Commented { sample: i, comment });
            }
            None if super::contains_keyword(raw, &config.keywords) => funnel.comments_sanitizer_dropped += 1,
            None => funnel.comments_no_keyword += 1,
        }
    }

    let mut test_rng = ChaCha8Rng::seed_from_u64(config.seed);
    test_rng.set_stream(2);
    let test_picks = select_test_positions(&samples, config, &mut test_rng, &mut out.shortfalls, funnel);

    // every position that needs an oracle, each scored once
    let mut to_score: Vec<Position> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for idx in commented.iter().map(|c| c.sample).chain(test_picks.iter().copied()) {
        let s = &samples[idx];
        slot.entry(s.fen.as_str()).or_insert_with(|| {
            to_score.push(s.triplet.position.clone());
            to_score.len() - 1
        });
    }
    let scored: Vec<Result<Scoring, EngineError>> = map_positions(&to_score, config.jobs, oracle, |o, p| {
        let eval = o.evaluate(p)?;
        let set = o.score_all_moves(p)?;
        Ok((eval, set))
    })?;

    let label = |value: i32| {
        let l5 = classify_situation(value, config.sigma_s, config.sigma_l);
        (l5, coarsen_to_3class(l5))
    };

    struct Good<'a> {
        c: &'a Commented,
        scoring: &'a Scoring,
    }
    let mut good = Vec::new();
    for c in &commented {
        let s = &samples[c.sample];
        match &scored[slot[s.fen.as_str()]] {
            Err(e) => {
                funnel.commented_scoring_failed += 1;
                out.rejects.push(RejectRecord {
                    source: sources[s.source].name.clone(),
                    game_index: s.game_index,
                    reason: "scoring_failed".into(),
                    detail: Some(format!("ply {}: {e}", s.triplet.ply)),
                });
            }
            Ok(scoring) => {
                if scoring.1.is_good(s.triplet.mv, config.sigma_good).unwrap_or(false) {
                    funnel.commented_good += 1;
                    good.push(Good { c, scoring });
                } else {
                    funnel.commented_not_good += 1;
                }
            }
        }
    }

    let mut split_rng = ChaCha8Rng::seed_from_u64(config.seed);
    split_rng.set_stream(1);
    let mut order: Vec<usize> = (0..good.len()).collect();
    order.shuffle(&mut split_rng);
    let n3 = (good.len() as f64 * config.stage3_fraction).floor() as usize;
    let mut to_stage3 = vec![false; good.len()];
    for &i in &order[..n3] {
        to_stage3[i] = true;
    }
    for (g, stage3) in good.iter().zip(to_stage3) {
        let s = &samples[g.c.sample];
        let (eval, set) = g.scoring;
        let value = match config.label_source {
            LabelSource::PreMove => eval.value,
            LabelSource::PostMove => set.value_of(s.triplet.mv).expect("good move is scored"),
        };
        let (label5, label3) = label(value);
        if stage3 {
            let record = set.to_record();
            out.stage3.push(Stage3Record {
                fen: s.fen.clone(),
                mv: move_to_iccs(s.triplet.mv),
                comment: g.c.comment.clone(),
                label5,
                label3,
                scored: record.entries,
                best_value: set.best_value(),
                depth: set.depth(),
            });
        } else {
            out.stage2.push(Stage2Record {
                fen: s.fen.clone(),
                mv: move_to_iccs(s.triplet.mv),
                comment: g.c.comment.clone(),
                label5,
                label3,
            });
        }
    }
    funnel.stage2 = out.stage2.len();
    funnel.stage3 = out.stage3.len();

    for idx in test_picks {
        let s = &samples[idx];
        match &scored[slot[s.fen.as_str()]] {
            Err(_) => funnel.test_scoring_failed += 1,
            Ok((eval, set)) => {
                let (label5, label3) = label(eval.value);
                out.test.push(TestRecord {
                    fen: s.fen.clone(),
                    label5,
                    label3,
                    scored: set.to_record().entries,
                    best_value: set.best_value(),
                    depth: set.depth(),
                    piece_count: s.triplet.position.piece_count(),
                    side: s.triplet.position.side_to_move(),
                });
            }
        }
    }
    funnel.test = out.test.len();
    Ok(out)
}

/// Distinct positions drawn per (piece count, side) cell. Returns sample
/// indices ordered by piece count, Red before Black.
fn select_test_positions(
    samples: &[Sample],
    config: &PipelineConfig,
    rng: &mut ChaCha8Rng,
    shortfalls: &mut Vec<Shortfall>,
    funnel: &mut Funnel,
) -> Vec<usize> {
    let per_side = config.test_per_piece_count / 2;
    let mut seen = HashSet::new();
    let mut cells: HashMap<(usize, Color), Vec<usize>> = HashMap::new();
    for (i, s) in samples.iter().enumerate() {
        let count = s.triplet.position.piece_count();
        if !config.test_piece_counts.contains(&count) || !seen.insert(s.fen.as_str()) {
            continue;
        }
        funnel.test_candidates += 1;
        cells.entry((count, s.triplet.position.side_to_move())).or_default().push(i);
    }
    let mut picks = Vec::new();
    if per_side == 0 {
        return picks;
    }
    for count in config.test_piece_counts.clone() {
        for side in [Color::Red, Color::Black] {
            let mut cell = cells.remove(&(count, side)).unwrap_or_default();
            cell.shuffle(rng);
            cell.truncate(per_side);
            if cell.len() < per_side {
                shortfalls.push(Shortfall { piece_count: count, side, wanted: per_side, got: cell.len() });
            }
            picks.extend(cell);
        }
    }
    funnel.test_selected = picks.len();
    picks
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Writes `stage1.jsonl`, `stage2.jsonl`, `stage3.jsonl`, `test.jsonl`,
/// `rejects.jsonl` and `funnel.json` into `dir`.
pub fn write_outputs(output: &PipelineOutput, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_jsonl(&dir.join("stage1.jsonl"), &output.stage1)?;
    write_jsonl(&dir.join("stage2.jsonl"), &output.stage2)?;
    write_jsonl(&dir.join("stage3.jsonl"), &output.stage3)?;
    write_jsonl(&dir.join("test.jsonl"), &output.test)?;
    write_jsonl(&dir.join("rejects.jsonl"), &output.rejects)?;
    #[derive(Serialize)]
    struct FunnelFile<'a> {
        #[serde(flatten)]
        funnel: &'a Funnel,
        test_shortfalls: &'a [Shortfall],
    }
    let text = serde_json::to_string_pretty(&FunnelFile { funnel: &output.funnel, test_shortfalls: &output.shortfalls })?;
    fs::write(dir.join("funnel.json"), text + "\n")
}

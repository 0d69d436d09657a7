use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::TestRecord;
use crate::engine::ScoredSetError;
use crate::reward::{parse_response, EvalItem, ModelResponse, ResponseFormat};

/// One sampled response to one test position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub fen: String,
    pub sample_index: usize,
    pub raw_text: String,
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("line {line}: {message}")]
    BadLine { line: usize, message: String },
    #[error("sample {sample_index} appears twice for {fen}")]
    DuplicateSample { fen: String, sample_index: usize },
    #[error("test record {fen}: {source}")]
    BadTestRecord { fen: String, source: ScoredSetError },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>, R: BufRead>(input: R) -> Result<Vec<T>, TranscriptError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| TranscriptError::BadLine { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

/// Test positions paired with their parsed responses in sample order.
/// Transcripts for positions outside the test set are counted and skipped.
pub struct Joined {
    pub items: Vec<EvalItem>,
    pub responses: Vec<Vec<ModelResponse>>,
    pub unmatched_transcripts: usize,
}

pub fn join_transcripts(
    tests: &[TestRecord],
    transcripts: &[TranscriptRecord],
    format: ResponseFormat,
) -> Result<Joined, TranscriptError> {
    let mut slot = HashMap::new();
    let mut items = Vec::with_capacity(tests.len());
    for (i, t) in tests.iter().enumerate() {
        let scored = t.scored_set().map_err(|source| TranscriptError::BadTestRecord { fen: t.fen.clone(), source })?;
        items.push(EvalItem { scored, truth: t.label5, piece_count: t.piece_count });
        slot.entry(t.fen.as_str()).or_insert(i);
    }
    let mut grouped: Vec<Vec<&TranscriptRecord>> = vec![Vec::new(); tests.len()];
    let mut unmatched = 0;
    for tr in transcripts {
        match slot.get(tr.fen.as_str()) {
            Some(&i) => grouped[i].push(tr),
            None => unmatched += 1,
        }
    }
    let mut responses = Vec::with_capacity(tests.len());
    for g in &mut grouped {
        g.sort_by_key(|t| t.sample_index);
        if let Some(w) = g.windows(2).find(|w| w[0].sample_index == w[1].sample_index) {
            return Err(TranscriptError::DuplicateSample { fen: w[0].fen.clone(), sample_index: w[0].sample_index });
        }
        responses.push(g.iter().map(|t| parse_response(&t.raw_text, format)).collect());
    }
    Ok(Joined { items, responses, unmatched_transcripts: unmatched })
}

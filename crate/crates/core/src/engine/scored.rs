use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Color, Move, Position};
use crate::movegen::legal_moves;
use crate::notation::{move_to_iccs, parse_fen, parse_iccs, to_fen};

#[derive(Debug, Error)]
pub enum ScoredSetError {
    #[error("position has no legal moves to score")]
    Empty,
    #[error("scored entries do not match the legal moves of {fen}")]
    CoverMismatch { fen: String },
    #[error("move {0} is not in the scored set")]
    MoveNotScored(Move),
    #[error("bad record: {0}")]
    BadRecord(String),
    #[error("scored file i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoredMove {
    pub mv: Move,
    /// Red-positive centipawns of the position after `mv`.
    pub value: i32,
}

/// Every legal move of a position with its value. The best value is the
/// one most favourable to the side to move: the maximum when Red moves,
/// the minimum when Black moves. All moves reaching it count as best.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredMoveSet {
    fen: String,
    side: Color,
    entries: Vec<ScoredMove>,
    best_value: i32,
    depth: u32,
}

/// Wire form: `{"fen":..,"entries":[{"iccs":..,"value":..}],"depth":..}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub fen: String,
    pub entries: Vec<EntryRecord>,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub iccs: String,
    pub value: i32,
}

impl ScoredMoveSet {
    /// Entries are put in move order and must cover the legal moves exactly.
    pub fn new(position: &Position, mut entries: Vec<ScoredMove>, depth: u32) -> Result<ScoredMoveSet, ScoredSetError> {
        entries.sort_by_key(|e| e.mv);
        let fen = to_fen(position);
        let legal = legal_moves(position);
        if legal.is_empty() {
            return Err(ScoredSetError::Empty);
        }
        if entries.len() != legal.len() || entries.iter().zip(&legal).any(|(e, m)| e.mv != *m) {
            return Err(ScoredSetError::CoverMismatch { fen });
        }
        let side = position.side_to_move();
        let best_value = match side {
            Color::Red => entries.iter().map(|e| e.value).max(),
            Color::Black => entries.iter().map(|e| e.value).min(),
        }
        .unwrap();
        Ok(ScoredMoveSet { fen, side, entries, best_value, depth })
    }

    pub fn fen(&self) -> &str {
        &self.fen
    }

    pub fn side_to_move(&self) -> Color {
        self.side
    }

    pub fn position(&self) -> Position {
        parse_fen(&self.fen).expect("scored set holds a validated FEN")
    }

    pub fn entries(&self) -> &[ScoredMove] {
        &self.entries
    }

    pub fn best_value(&self) -> i32 {
        self.best_value
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn value_of(&self, mv: Move) -> Option<i32> {
        self.entries.binary_search_by_key(&mv, |e| e.mv).ok().map(|i| self.entries[i].value)
    }

    pub fn contains(&self, mv: Move) -> bool {
        self.value_of(mv).is_some()
    }

    pub fn is_best(&self, mv: Move) -> bool {
        self.value_of(mv) == Some(self.best_value)
    }

    /// `|NewValue - BestValue| <= sigma_good`.
    pub fn is_good(&self, mv: Move, sigma_good: i32) -> Result<bool, ScoredSetError> {
        let v = self.value_of(mv).ok_or(ScoredSetError::MoveNotScored(mv))?;
        Ok((v as i64 - self.best_value as i64).abs() <= sigma_good as i64)
    }

    pub fn best_moves(&self) -> Vec<Move> {
        self.entries.iter().filter(|e| e.value == self.best_value).map(|e| e.mv).collect()
    }

    pub fn to_record(&self) -> ScoredRecord {
        ScoredRecord {
            fen: self.fen.clone(),
            entries: self.entries.iter().map(|e| EntryRecord { iccs: move_to_iccs(e.mv), value: e.value }).collect(),
            depth: self.depth,
        }
    }

    pub fn from_record(record: &ScoredRecord) -> Result<ScoredMoveSet, ScoredSetError> {
        let position = parse_fen(&record.fen).map_err(|e| ScoredSetError::BadRecord(e.to_string()))?;
        let mut seen = HashSet::new();
        let mut entries = Vec::with_capacity(record.entries.len());
        for e in &record.entries {
            let mv = parse_iccs(&e.iccs).map_err(|e| ScoredSetError::BadRecord(e.to_string()))?;
            if !seen.insert(mv) {
                return Err(ScoredSetError::BadRecord(format!("duplicate entry {}", e.iccs)));
            }
            entries.push(ScoredMove { mv, value: e.value });
        }
        ScoredMoveSet::new(&position, entries, record.depth)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("record serializes")
    }

    pub fn from_json_line(line: &str) -> Result<ScoredMoveSet, ScoredSetError> {
        let record: ScoredRecord = serde_json::from_str(line).map_err(|e| ScoredSetError::BadRecord(e.to_string()))?;
        ScoredMoveSet::from_record(&record)
    }
}

pub fn write_scored_file<W: Write>(mut out: W, sets: &[ScoredMoveSet]) -> Result<(), ScoredSetError> {
    for set in sets {
        writeln!(out, "{}", set.to_json_line())?;
    }
    Ok(())
}

pub fn read_scored_file<R: BufRead>(input: R) -> Result<Vec<ScoredMoveSet>, ScoredSetError> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(ScoredMoveSet::from_json_line(&line)?);
    }
    Ok(out)
}

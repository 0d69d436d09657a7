//! Position evaluation: an external UCI engine or the built-in material
//! fallback, both reporting centipawns with the Red-positive sign convention.

mod material;
mod pool;
mod scored;
mod uci;

use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use crate::board::{Color, Move, Position};
use crate::movegen::{is_legal, legal_moves};

pub use material::{material_eval, piece_weight, MaterialOracle};
pub use pool::{map_positions, OracleSpec};
pub use scored::{read_scored_file, write_scored_file, EntryRecord, ScoredMove, ScoredMoveSet, ScoredRecord, ScoredSetError};
pub use uci::{parse_info_score, EngineScore, UciEngine};

/// Environment variable consulted for the engine binary when no path is given.
pub const ENGINE_ENV: &str = "XIANGQI_ENGINE";
pub const DEFAULT_DEPTH: u32 = 25;
/// `score mate N` maps to `±(MATE_VALUE - |N|)`.
pub const MATE_VALUE: i32 = 30_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSettings {
    pub depth: u32,
    pub engine_path: Option<PathBuf>,
    pub threads: u32,
    pub timeout: Duration,
    /// Extra attempts per move when scoring a full move set.
    pub retries: u32,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            depth: DEFAULT_DEPTH,
            engine_path: None,
            threads: 1,
            timeout: Duration::from_secs(120),
            retries: 2,
        }
    }
}

impl OracleSettings {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.depth < 1 {
            return Err(EngineError::InvalidSettings("depth must be at least 1"));
        }
        if self.timeout.is_zero() {
            return Err(EngineError::InvalidSettings("timeout must be positive"));
        }
        if self.threads < 1 {
            return Err(EngineError::InvalidSettings("threads must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluation {
    /// Centipawns, positive favours Red regardless of side to move.
    pub value: i32,
    pub best_move: Move,
    pub is_mate_mapped: bool,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("engine unavailable: {0}")]
    Unavailable(String),
    #[error("engine did not answer within the timeout")]
    Timeout,
    #[error("unexpected engine output: {0:?}")]
    Protocol(String),
    #[error("engine best move {0:?} is not legal here; one side's rules are wrong")]
    IllegalBestMove(String),
    #[error("move {0} is not legal in this position")]
    IllegalMove(Move),
    #[error("position has no legal moves")]
    GameOver,
    #[error("invalid oracle settings: {0}")]
    InvalidSettings(&'static str),
    #[error(transparent)]
    Scored(#[from] ScoredSetError),
    #[error("engine i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Maps a mover-relative score to the Red-positive convention.
pub fn red_positive(mover: Color, mover_value: i32) -> i32 {
    match mover {
        Color::Red => mover_value,
        Color::Black => -mover_value,
    }
}

/// Anything that can value positions and moves.
pub trait Oracle {
    fn evaluate(&mut self, position: &Position) -> Result<Evaluation, EngineError>;

    /// Value of the position reached by `mv`, Red-positive.
    fn evaluate_after(&mut self, position: &Position, mv: Move) -> Result<i32, EngineError>;

    /// Search depth recorded alongside scored sets (0 for static evaluators).
    fn depth(&self) -> u32;

    /// Called before a retry so stateful engines can restart.
    fn reset(&mut self) -> Result<(), EngineError> {
        Ok(())
    }

    fn retries(&self) -> u32 {
        0
    }

    fn score_all_moves(&mut self, position: &Position) -> Result<ScoredMoveSet, EngineError> {
        let mut entries = Vec::new();
        for mv in legal_moves(position) {
            let mut attempt = 0;
            let value = loop {
                match self.evaluate_after(position, mv) {
                    Ok(v) => break v,
                    Err(e @ (EngineError::IllegalMove(_) | EngineError::IllegalBestMove(_))) => return Err(e),
                    Err(e) if attempt >= self.retries() => return Err(e),
                    Err(_) => {
                        attempt += 1;
                        self.reset()?;
                    }
                }
            };
            entries.push(ScoredMove { mv, value });
        }
        Ok(ScoredMoveSet::new(position, entries, self.depth())?)
    }
}

pub(crate) fn require_legal(position: &Position, mv: Move) -> Result<Position, EngineError> {
    if !is_legal(position, mv) {
        return Err(EngineError::IllegalMove(mv));
    }
    Ok(position.apply_unchecked(mv))
}

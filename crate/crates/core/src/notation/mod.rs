//! Text formats: FEN positions, ICCS and CFF move tokens, PGN game records.

pub mod cff;
pub mod fen;
pub mod iccs;
pub mod pgn;

pub use cff::{move_to_cff, parse_cff, CffError};
pub use fen::{parse_fen, to_fen, FenError};
pub use iccs::{move_to_iccs, parse_iccs, IccsError};
pub use pgn::{parse_pgn, GameRecord, GameResult, PgnBatch, PgnReject, RejectReason};

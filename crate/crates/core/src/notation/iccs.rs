//! ICCS move tokens: `[a-i][0-9][a-i][0-9]`, file then rank for each end.

use thiserror::Error;

use crate::board::{Move, Square};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid ICCS move {0:?}")]
pub struct IccsError(pub String);

/// Parses `h2e2`. Also accepts the uppercase and dashed forms (`H2-E2`)
/// found in older records.
pub fn parse_iccs(text: &str) -> Result<Move, IccsError> {
    let err = || IccsError(text.to_owned());
    let b = text.as_bytes();
    let (from, to) = match b.len() {
        4 => (&text[0..2], &text[2..4]),
        5 if b[2] == b'-' => (&text[0..2], &text[3..5]),
        _ => return Err(err()),
    };
    let from: Square = from.parse().map_err(|_| err())?;
    let to: Square = to.parse().map_err(|_| err())?;
    Move::new(from, to).ok_or_else(err)
}

pub fn move_to_iccs(mv: Move) -> String {
    mv.to_string()
}

/// Whether `token` has ICCS shape (used for per-token format detection).
pub fn looks_like_iccs(token: &str) -> bool {
    parse_iccs(token).is_ok()
}

//! Per-game and per-comment filters applied before anything is scored.

use std::time::Duration;

use thiserror::Error;

use crate::board::{Color, Move, Position};
use crate::movegen::is_legal;
use crate::notation::{GameRecord, GameResult};

/// Ply indices kept from a game: the winner's moves in decisive games,
/// every move in draws, nothing when the result is unknown.
pub fn winner_filter(record: &GameRecord) -> Vec<usize> {
    let keep = |side: Color| -> bool {
        match record.result {
            GameResult::RedWin => side == Color::Red,
            GameResult::BlackWin => side == Color::Black,
            GameResult::Draw => true,
            GameResult::Unknown => false,
        }
    };
    let mut side = record.start.side_to_move();
    let mut out = Vec::new();
    for i in 0..record.plies.len() {
        if keep(side) {
            out.push(i);
        }
        side = side.opponent();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triplet {
    /// Position before the move.
    pub position: Position,
    pub mv: Move,
    pub comment: Option<String>,
    pub ply: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("ply {0} does not replay legally")]
pub struct ReplayError(pub usize);

/// One triplet per ply kept by [`winner_filter`]. Any illegal ply rejects the
/// whole record.
pub fn extract_triplets(record: &GameRecord) -> Result<Vec<Triplet>, ReplayError> {
    let kept = winner_filter(record);
    let mut next_kept = kept.iter().peekable();
    let mut position = record.start.clone();
    let mut out = Vec::with_capacity(kept.len());
    for (i, ply) in record.plies.iter().enumerate() {
        if !is_legal(&position, ply.mv) {
            return Err(ReplayError(i));
        }
        if next_kept.peek() == Some(&&i) {
            next_kept.next();
            out.push(Triplet { position: position.clone(), mv: ply.mv, comment: ply.comment.clone(), ply: i });
        }
        position = position.apply_unchecked(ply.mv);
    }
    Ok(out)
}

/// Keyword list used when none is configured: piece names, sides, move
/// verbs and common assessment words, in Chinese and English.
pub const DEFAULT_KEYWORDS: &[&str] = &[
    "红", "紅", "黑", "车", "車", "俥", "马", "馬", "傌", "炮", "砲", "包", "兵", "卒", "相", "象", "仕", "士", "帅",
    "帥", "将", "將", "进", "進", "退", "平", "先手", "后手", "後手", "优势", "優勢", "均势", "均勢", "局面", "形势",
    "形勢", "攻", "守", "杀", "殺", "残局", "殘局", "开局", "開局", "中局", "布局", "佈局", "弃子", "棄子", "兑", "兌",
    "red", "black", "rook", "chariot", "knight", "horse", "cannon", "elephant", "advisor", "guard", "king",
    "general", "pawn", "soldier", "check", "checkmate", "mate", "advantage", "opening", "endgame", "middlegame",
];

pub fn default_keywords() -> Vec<String> {
    DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect()
}

/// Case-insensitive; ASCII keywords must stand as whole words, other
/// keywords match anywhere.
pub fn contains_keyword(text: &str, keywords: &[String]) -> bool {
    let lower = text.to_lowercase();
    keywords.iter().any(|k| {
        let k = k.to_lowercase();
        if k.is_empty() {
            return false;
        }
        if !k.is_ascii() {
            return lower.contains(&k);
        }
        lower.match_indices(&k).any(|(i, _)| {
            let before = lower[..i].chars().next_back();
            let after = lower[i + k.len()..].chars().next();
            !before.is_some_and(|c| c.is_ascii_alphanumeric()) && !after.is_some_and(|c| c.is_ascii_alphanumeric())
        })
    })
}

#[derive(Debug, Error)]
pub enum SanitizerError {
    #[error("sanitizer unavailable: {0}")]
    Unavailable(String),
}

/// Rewrites comment text, e.g. to strip personal names.
pub trait Sanitizer: Sync {
    fn sanitize(&self, text: &str) -> Result<String, SanitizerError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentitySanitizer;

impl Sanitizer for IdentitySanitizer {
    fn sanitize(&self, text: &str) -> Result<String, SanitizerError> {
        Ok(text.to_owned())
    }
}

/// POSTs the comment as the request body; the response body is the cleaned
/// comment.
#[derive(Debug, Clone)]
pub struct HttpSanitizer {
    url: String,
    timeout: Duration,
}

impl HttpSanitizer {
    pub fn new(url: impl Into<String>) -> HttpSanitizer {
        HttpSanitizer { url: url.into(), timeout: Duration::from_secs(30) }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> HttpSanitizer {
        self.timeout = timeout;
        self
    }
}

impl Sanitizer for HttpSanitizer {
    fn sanitize(&self, text: &str) -> Result<String, SanitizerError> {
        let response = ureq::post(&self.url)
            .timeout(self.timeout)
            .set("Content-Type", "text/plain; charset=utf-8")
            .send_string(text)
            .map_err(|e| SanitizerError::Unavailable(e.to_string()))?;
        let body = response.into_string().map_err(|e| SanitizerError::Unavailable(e.to_string()))?;
        Ok(body.trim().to_owned())
    }
}

/// `None` when no keyword matches or the sanitized text comes back empty.
pub fn filter_comment(comment: &str, keywords: &[String], sanitizer: &dyn Sanitizer) -> Result<Option<String>, SanitizerError> {
    if !contains_keyword(comment, keywords) {
        return Ok(None);
    }
    let cleaned = sanitizer.sanitize(comment)?;
    Ok((!cleaned.trim().is_empty()).then_some(cleaned))
}

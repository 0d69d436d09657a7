//! Xiangqi PGN: tag pairs, numbered movetext with ICCS or CFF tokens
//! (detected per token), brace comments and a result terminator.
//!
//! Parsing is per game: a bad game lands in the reject list and the batch
//! carries on. Variations and NAGs are skipped with a warning.

use std::fmt::Write as _;

use serde::Serialize;

use crate::board::{Move, Position};
use crate::movegen::is_legal;
use crate::notation::cff::{move_to_cff, parse_cff, CffError};
use crate::notation::fen::{parse_fen, to_fen};
use crate::notation::iccs::{looks_like_iccs, move_to_iccs, parse_iccs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GameResult {
    RedWin,
    BlackWin,
    Draw,
    Unknown,
}

impl GameResult {
    pub fn from_tag(value: &str) -> Option<GameResult> {
        Some(match value.trim() {
            "1-0" | "红胜" | "紅勝" => GameResult::RedWin,
            "0-1" | "黑胜" | "黑勝" => GameResult::BlackWin,
            "1/2-1/2" | "½-½" | "和棋" | "和" => GameResult::Draw,
            "*" => GameResult::Unknown,
            _ => return None,
        })
    }

    pub fn as_tag(self) -> &'static str {
        match self {
            GameResult::RedWin => "1-0",
            GameResult::BlackWin => "0-1",
            GameResult::Draw => "1/2-1/2",
            GameResult::Unknown => "*",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ply {
    pub mv: Move,
    pub comment: Option<String>,
    /// The token as written in the source record.
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameRecord {
    /// Position of the game within its source file, counting rejected games.
    pub index: usize,
    pub metadata: Vec<(String, String)>,
    pub start: Position,
    pub plies: Vec<Ply>,
    pub result: GameResult,
    /// Comment that appears before the first move.
    pub preamble: Option<String>,
}

impl GameRecord {
    pub fn tag(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Positions before each ply, followed by the final position.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::with_capacity(self.plies.len() + 1);
        let mut cur = self.start.clone();
        for ply in &self.plies {
            let next = cur.apply_unchecked(ply.mv);
            out.push(cur);
            cur = next;
        }
        out.push(cur);
        out
    }

    pub fn final_position(&self) -> Position {
        self.positions().pop().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectReason {
    #[serde(rename = "illegal_ply")]
    IllegalPlyAt { index: usize, token: String, detail: String },
    UnparsableToken { index: usize, token: String },
    MissingResult,
    BadFen { detail: String },
    Syntax { detail: String },
}

impl RejectReason {
    pub fn code(&self) -> &'static str {
        match self {
            RejectReason::IllegalPlyAt { .. } => "illegal_ply",
            RejectReason::UnparsableToken { .. } => "unparsable_token",
            RejectReason::MissingResult => "missing_result",
            RejectReason::BadFen { .. } => "bad_fen",
            RejectReason::Syntax { .. } => "syntax",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PgnReject {
    pub game_index: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PgnWarning {
    pub game_index: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct PgnBatch {
    pub games: Vec<GameRecord>,
    pub rejects: Vec<PgnReject>,
    pub warnings: Vec<PgnWarning>,
}

/// Text encodings accepted for PGN input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TextEncoding {
    /// UTF-8 when the bytes are valid UTF-8 (BOM stripped), GB18030 otherwise.
    #[default]
    Auto,
    Utf8,
    Gb18030,
}

pub fn decode_text(bytes: &[u8], encoding: TextEncoding) -> String {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    match encoding {
        TextEncoding::Utf8 => String::from_utf8_lossy(bytes).into_owned(),
        TextEncoding::Gb18030 => encoding_rs::GB18030.decode_without_bom_handling(bytes).0.into_owned(),
        TextEncoding::Auto => match std::str::from_utf8(bytes) {
            Ok(s) => s.to_owned(),
            Err(_) => encoding_rs::GB18030.decode_without_bom_handling(bytes).0.into_owned(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Tag(String, String),
    Comment(String),
    Move(String),
    Result(String),
    Variation,
    Nag,
    Bad(String),
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '{' | '}' | '(' | ')' | '[' | ']' | ';')
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        match c {
            _ if c.is_whitespace() => {
                chars.next();
            }
            '[' => {
                chars.next();
                let mut body = String::new();
                let mut in_quotes = false;
                while let Some((_, c)) = chars.next() {
                    match c {
                        '\\' if in_quotes => {
                            if let Some((_, esc)) = chars.next() {
                                body.push('\\');
                                body.push(esc);
                            }
                        }
                        '"' => {
                            in_quotes = !in_quotes;
                            body.push(c);
                        }
                        ']' if !in_quotes => break,
                        _ => body.push(c),
                    }
                }
                tokens.push(parse_tag(&body).unwrap_or_else(|| Token::Bad(format!("[{body}]"))));
            }
            '{' => {
                chars.next();
                let mut body = String::new();
                for (_, c) in chars.by_ref() {
                    if c == '}' {
                        break;
                    }
                    body.push(c);
                }
                tokens.push(Token::Comment(body.trim().to_owned()));
            }
            ';' => {
                let mut body = String::new();
                chars.next();
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    body.push(c);
                    chars.next();
                }
                tokens.push(Token::Comment(body.trim().to_owned()));
            }
            '(' => {
                let mut depth = 0usize;
                for (_, c) in chars.by_ref() {
                    match c {
                        '(' => depth += 1,
                        ')' => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                tokens.push(Token::Variation);
            }
            ')' | ']' | '}' => {
                chars.next();
                tokens.push(Token::Bad(c.to_string()));
            }
            _ => {
                let mut end = start;
                while let Some(&(i, c)) = chars.peek() {
                    if is_delimiter(c) {
                        break;
                    }
                    end = i + c.len_utf8();
                    chars.next();
                }
                push_word(&text[start..end], &mut tokens);
            }
        }
    }
    tokens
}

fn push_word(word: &str, tokens: &mut Vec<Token>) {
    if GameResult::from_tag(word).is_some() && !word.chars().any(|c| !"120-/½*".contains(c)) {
        tokens.push(Token::Result(word.to_owned()));
        return;
    }
    if word.starts_with('$') {
        tokens.push(Token::Nag);
        return;
    }
    // strip a leading move number: "12." "12..." "12.炮二平五"
    let digits = word.chars().take_while(|c| c.is_ascii_digit()).count();
    let rest = if digits > 0 && word[digits..].starts_with('.') {
        word[digits..].trim_start_matches('.')
    } else {
        word
    };
    let rest = rest.trim_end_matches(['!', '?', '+', '#']);
    if !rest.is_empty() && !rest.chars().all(|c| c == '.' || c == '…') {
        tokens.push(Token::Move(rest.to_owned()));
    }
}

fn parse_tag(body: &str) -> Option<Token> {
    let body = body.trim();
    let key_end = body.find(char::is_whitespace)?;
    let key = &body[..key_end];
    let value = body[key_end..].trim();
    let inner = value.strip_prefix('"')?.strip_suffix('"')?;
    let value = inner.replace("\\\"", "\"").replace("\\\\", "\\");
    Some(Token::Tag(key.to_owned(), value))
}

/// Splits a token stream into per-game slices. A tag after movetext, or any
/// token after a result terminator, opens a new game.
fn split_games(tokens: Vec<Token>) -> Vec<Vec<Token>> {
    let mut games: Vec<Vec<Token>> = Vec::new();
    let mut cur: Vec<Token> = Vec::new();
    let mut seen_moves = false;
    let mut ended = false;
    for tok in tokens {
        let is_tag = matches!(tok, Token::Tag(..));
        if (is_tag && seen_moves) || (ended && !matches!(tok, Token::Comment(_))) {
            games.push(std::mem::take(&mut cur));
            seen_moves = false;
            ended = false;
        }
        match &tok {
            Token::Move(_) | Token::Variation | Token::Nag | Token::Bad(_) => seen_moves = true,
            Token::Result(_) => {
                seen_moves = true;
                ended = true;
            }
            _ => {}
        }
        cur.push(tok);
    }
    if cur.iter().any(|t| !matches!(t, Token::Comment(_))) {
        games.push(cur);
    }
    games
}

/// Parses every game in `text`. Never fails as a whole.
pub fn parse_pgn(text: &str) -> PgnBatch {
    let mut batch = PgnBatch::default();
    for (index, tokens) in split_games(tokenize(text)).into_iter().enumerate() {
        match parse_game(index, tokens, &mut batch.warnings) {
            Ok(game) => batch.games.push(game),
            Err(reason) => batch.rejects.push(PgnReject { game_index: index, reason }),
        }
    }
    batch
}

fn parse_game(index: usize, tokens: Vec<Token>, warnings: &mut Vec<PgnWarning>) -> Result<GameRecord, RejectReason> {
    let mut metadata: Vec<(String, String)> = Vec::new();
    let mut terminator: Option<String> = None;
    let mut body: Vec<Token> = Vec::new();
    for tok in tokens {
        match tok {
            Token::Tag(k, v) => metadata.push((k, v)),
            Token::Result(r) => terminator = Some(r),
            Token::Variation => warnings.push(PgnWarning { game_index: index, message: "variation skipped".into() }),
            Token::Nag => warnings.push(PgnWarning { game_index: index, message: "NAG skipped".into() }),
            Token::Bad(b) => return Err(RejectReason::Syntax { detail: format!("stray {b:?}") }),
            other => body.push(other),
        }
    }

    let tag = |key: &str| metadata.iter().find(|(k, _)| k.eq_ignore_ascii_case(key)).map(|(_, v)| v.clone());
    let start = match tag("FEN") {
        Some(fen) if !fen.trim().is_empty() => parse_fen(&fen).map_err(|e| RejectReason::BadFen { detail: e.to_string() })?,
        _ => Position::start(),
    };

    let mut plies: Vec<Ply> = Vec::new();
    let mut preamble: Option<String> = None;
    let mut position = start.clone();
    for tok in body {
        match tok {
            Token::Comment(text) if text.is_empty() => {}
            Token::Comment(text) => {
                let slot = match plies.last_mut() {
                    Some(ply) => &mut ply.comment,
                    None => &mut preamble,
                };
                match slot {
                    Some(existing) => {
                        existing.push(' ');
                        existing.push_str(&text);
                    }
                    None => *slot = Some(text),
                }
            }
            Token::Move(token) => {
                let ply_index = plies.len();
                let mv = decode_move(&position, &token, ply_index)?;
                position = position.apply_unchecked(mv);
                plies.push(Ply { mv, comment: None, token });
            }
            _ => unreachable!(),
        }
    }

    let result = match (tag("Result"), &terminator) {
        (Some(v), _) if GameResult::from_tag(&v).is_some() => GameResult::from_tag(&v).unwrap(),
        (_, Some(t)) => GameResult::from_tag(t).unwrap_or(GameResult::Unknown),
        _ => return Err(RejectReason::MissingResult),
    };
    if let (Some(t), Some(v)) = (&terminator, tag("Result")) {
        if GameResult::from_tag(t) != GameResult::from_tag(&v) {
            warnings.push(PgnWarning {
                game_index: index,
                message: format!("Result tag {v:?} disagrees with terminator {t:?}; tag wins"),
            });
        }
    }

    Ok(GameRecord { index, metadata, start, plies, result, preamble })
}

fn decode_move(position: &Position, token: &str, index: usize) -> Result<Move, RejectReason> {
    if looks_like_iccs(token) {
        let mv = parse_iccs(token).unwrap();
        if is_legal(position, mv) {
            return Ok(mv);
        }
        return Err(RejectReason::IllegalPlyAt { index, token: token.to_owned(), detail: "not a legal move".into() });
    }
    match parse_cff(position, token) {
        Ok(mv) => Ok(mv),
        Err(CffError::UnknownGlyph(_)) | Err(CffError::Malformed(_)) => {
            Err(RejectReason::UnparsableToken { index, token: token.to_owned() })
        }
        Err(e) => Err(RejectReason::IllegalPlyAt { index, token: token.to_owned(), detail: e.to_string() }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveFormat {
    Iccs,
    Cff,
}

/// Writes a record back out. Tags are emitted in stored order; moves are
/// re-encoded in `format`, one full move per line.
pub fn write_pgn(record: &GameRecord, format: MoveFormat) -> String {
    let mut out = String::new();
    for (k, v) in &record.metadata {
        let v = v.replace('\\', "\\\\").replace('"', "\\\"");
        let _ = writeln!(out, "[{k} \"{v}\"]");
    }
    if record.start != Position::start() && record.tag("FEN").is_none() {
        let _ = writeln!(out, "[FEN \"{}\"]", to_fen(&record.start));
    }
    out.push('\n');
    if let Some(c) = &record.preamble {
        let _ = writeln!(out, "{{{c}}}");
    }
    let positions = record.positions();
    let mut line = String::new();
    let mut number = 1;
    for (i, ply) in record.plies.iter().enumerate() {
        let pos = &positions[i];
        let token = match format {
            MoveFormat::Iccs => move_to_iccs(ply.mv),
            MoveFormat::Cff => move_to_cff(pos, ply.mv).expect("replayed ply has a mover piece"),
        };
        let red = pos.side_to_move() == crate::board::Color::Red;
        if red || i == 0 {
            let _ = write!(line, "{number}.{} ", if red { "" } else { ".." });
        }
        line.push_str(&token);
        if let Some(c) = &ply.comment {
            let _ = write!(line, " {{{c}}}");
        }
        if red {
            line.push(' ');
        } else {
            out.push_str(line.trim_end());
            out.push('\n');
            line.clear();
            number += 1;
        }
    }
    if !line.is_empty() {
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push_str(record.result.as_tag());
    out.push_str("\n\n");
    out
}

//! Chinese four-glyph move notation: piece, source file, direction, then
//! either a destination file or a step count.
//!
//! Files are counted from each player's own right: Red writes Chinese
//! numerals (一 = file i), Black writes Arabic digits (1 = file a). Two or
//! more like pieces on one file are told apart with 前/中/後 (or ordinals
//! 一..五 for four or five pawns) in place of the file. When tandem pawns
//! sit on more than one file, the pawn glyph is dropped and the file numeral
//! follows the position glyph, e.g. `前七進一`.
//!
//! Parsing accepts traditional and simplified glyphs and both numeral sets
//! for either side. Serialization emits traditional glyphs.

use thiserror::Error;

use crate::board::{Color, Move, PieceKind, Position, Square};
use crate::movegen::is_legal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CffError {
    #[error("unknown glyph {0:?}")]
    UnknownGlyph(char),
    #[error("malformed CFF token {0:?}")]
    Malformed(String),
    #[error("no matching piece for {0:?}")]
    NoSuchPiece(String),
    #[error("{0:?} denotes an illegal move")]
    IllegalDenotedMove(String),
    #[error("{0:?} matches more than one legal move")]
    AmbiguousMove(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Backward,
    Sideways,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rank {
    Front,
    Middle,
    Back,
    Ordinal(u8),
}

fn piece_kind(c: char) -> Option<PieceKind> {
    Some(match c {
        '帥' | '帅' | '將' | '将' => PieceKind::King,
        '仕' | '士' => PieceKind::Guard,
        '相' | '象' => PieceKind::Elephant,
        '馬' | '马' | '傌' | '㐷' => PieceKind::Knight,
        '車' | '车' | '俥' | '伡' => PieceKind::Rook,
        '炮' | '砲' | '包' => PieceKind::Cannon,
        '兵' | '卒' => PieceKind::Pawn,
        _ => return None,
    })
}

fn numeral(c: char) -> Option<u8> {
    const CHINESE: [char; 9] = ['一', '二', '三', '四', '五', '六', '七', '八', '九'];
    if let Some(i) = CHINESE.iter().position(|&g| g == c) {
        return Some(i as u8 + 1);
    }
    match c {
        '1'..='9' => Some(c as u8 - b'0'),
        '１'..='９' => Some((c as u32 - '１' as u32) as u8 + 1),
        _ => None,
    }
}

fn direction(c: char) -> Option<Direction> {
    match c {
        '進' | '进' => Some(Direction::Forward),
        '退' => Some(Direction::Backward),
        '平' => Some(Direction::Sideways),
        _ => None,
    }
}

fn rank_marker(c: char) -> Option<Rank> {
    match c {
        '前' => Some(Rank::Front),
        '中' => Some(Rank::Middle),
        '後' | '后' => Some(Rank::Back),
        _ => None,
    }
}

fn is_known(c: char) -> bool {
    piece_kind(c).is_some() || numeral(c).is_some() || direction(c).is_some() || rank_marker(c).is_some()
}

/// File index for a side-relative file number 1–9.
fn file_index(color: Color, number: u8) -> u8 {
    match color {
        Color::Red => 9 - number,
        Color::Black => number - 1,
    }
}

fn file_number(color: Color, file: u8) -> u8 {
    match color {
        Color::Red => 9 - file,
        Color::Black => file + 1,
    }
}

fn emit_numeral(color: Color, n: u8) -> char {
    const CHINESE: [char; 9] = ['一', '二', '三', '四', '五', '六', '七', '八', '九'];
    match color {
        Color::Red => CHINESE[n as usize - 1],
        Color::Black => (b'0' + n) as char,
    }
}

fn emit_piece(color: Color, kind: PieceKind) -> char {
    match (color, kind) {
        (Color::Red, PieceKind::King) => '帥',
        (Color::Red, PieceKind::Guard) => '仕',
        (Color::Red, PieceKind::Elephant) => '相',
        (Color::Black, PieceKind::King) => '將',
        (Color::Black, PieceKind::Guard) => '士',
        (Color::Black, PieceKind::Elephant) => '象',
        (_, PieceKind::Knight) => '馬',
        (_, PieceKind::Rook) => '車',
        (Color::Red, PieceKind::Cannon) => '炮',
        (Color::Black, PieceKind::Cannon) => '砲',
        (Color::Red, PieceKind::Pawn) => '兵',
        (Color::Black, PieceKind::Pawn) => '卒',
    }
}

/// Squares holding `color`'s pieces of `kind` on `file`, frontmost first.
fn file_column(position: &Position, color: Color, kind: PieceKind, file: u8) -> Vec<Square> {
    let mut squares: Vec<Square> = (0..10)
        .filter_map(|rank| Square::new(file, rank))
        .filter(|&sq| matches!(position.piece_at(sq), Some(p) if p.color == color && p.kind == kind))
        .collect();
    if color == Color::Red {
        squares.reverse();
    }
    squares
}

fn moves_straight(kind: PieceKind) -> bool {
    matches!(kind, PieceKind::King | PieceKind::Rook | PieceKind::Cannon | PieceKind::Pawn)
}

/// Destination denoted from `from` by a direction and its trailing numeral.
fn destination(color: Color, kind: PieceKind, from: Square, dir: Direction, n: u8) -> Option<Square> {
    let fwd = color.forward();
    if moves_straight(kind) {
        return match dir {
            Direction::Sideways => Square::new(file_index(color, n), from.rank()),
            Direction::Forward => from.offset(0, fwd * n as i8),
            Direction::Backward => from.offset(0, -fwd * n as i8),
        };
    }
    let sign = match dir {
        Direction::Forward => fwd,
        Direction::Backward => -fwd,
        Direction::Sideways => return None,
    };
    let to_file = file_index(color, n) as i8;
    let df = to_file - from.file() as i8;
    let dr = match (kind, df.abs()) {
        (PieceKind::Guard, 1) => 1,
        (PieceKind::Elephant, 2) => 2,
        (PieceKind::Knight, 1) => 2,
        (PieceKind::Knight, 2) => 1,
        _ => return None,
    };
    from.offset(df, sign * dr)
}

fn select(column: &[Square], rank: Rank) -> Option<Square> {
    let n = column.len();
    let idx = match rank {
        Rank::Front => 0,
        Rank::Back => n - 1,
        Rank::Middle if n == 3 => 1,
        Rank::Middle => return None,
        Rank::Ordinal(k) => k as usize - 1,
    };
    column.get(idx).copied()
}

/// Decodes a CFF token for the side to move in `position`.
pub fn parse_cff(position: &Position, text: &str) -> Result<Move, CffError> {
    let token = text.trim();
    let glyphs: Vec<char> = token.chars().collect();
    if let Some(&bad) = glyphs.iter().find(|&&c| !is_known(c)) {
        return Err(CffError::UnknownGlyph(bad));
    }
    if glyphs.len() != 4 {
        return Err(CffError::Malformed(token.to_owned()));
    }
    let malformed = || CffError::Malformed(token.to_owned());
    let color = position.side_to_move();
    let dir = direction(glyphs[2]).ok_or_else(malformed)?;
    let n = numeral(glyphs[3]).ok_or_else(malformed)?;

    let sources: Vec<(Square, PieceKind)> = if let Some(kind) = piece_kind(glyphs[0]) {
        if let Some(file_no) = numeral(glyphs[1]) {
            file_column(position, color, kind, file_index(color, file_no))
                .into_iter()
                .map(|sq| (sq, kind))
                .collect()
        } else {
            // piece-first variant of the tandem form: 車前進一
            let rank = rank_marker(glyphs[1]).ok_or_else(malformed)?;
            tandem(position, color, kind, None, rank)
        }
    } else {
        let rank = rank_marker(glyphs[0])
            .or_else(|| numeral(glyphs[0]).filter(|k| *k <= 5).map(Rank::Ordinal))
            .ok_or_else(malformed)?;
        if let Some(kind) = piece_kind(glyphs[1]) {
            tandem(position, color, kind, None, rank)
        } else {
            let file_no = numeral(glyphs[1]).ok_or_else(malformed)?;
            tandem(position, color, PieceKind::Pawn, Some(file_index(color, file_no)), rank)
        }
    };
    if sources.is_empty() {
        return Err(CffError::NoSuchPiece(token.to_owned()));
    }

    let mut found: Vec<Move> = sources
        .into_iter()
        .filter_map(|(from, kind)| {
            let to = destination(color, kind, from, dir, n)?;
            Move::new(from, to).filter(|&m| is_legal(position, m))
        })
        .collect();
    found.dedup();
    match found.len() {
        0 => Err(CffError::IllegalDenotedMove(token.to_owned())),
        1 => Ok(found[0]),
        _ => Err(CffError::AmbiguousMove(token.to_owned())),
    }
}

/// Pieces picked by a rank marker among files holding two or more of `kind`.
fn tandem(position: &Position, color: Color, kind: PieceKind, file: Option<u8>, rank: Rank) -> Vec<(Square, PieceKind)> {
    let files: Vec<u8> = match file {
        Some(f) => vec![f],
        None => (0..9).collect(),
    };
    files
        .into_iter()
        .map(|f| file_column(position, color, kind, f))
        .filter(|column| column.len() >= 2)
        .filter_map(|column| select(&column, rank))
        .map(|sq| (sq, kind))
        .collect()
}

/// Encodes `mv` for the side to move. The piece on `mv.from` must belong to
/// the mover; legality is not checked here.
pub fn move_to_cff(position: &Position, mv: Move) -> Result<String, CffError> {
    let color = position.side_to_move();
    let piece = position
        .piece_at(mv.from)
        .filter(|p| p.color == color)
        .ok_or_else(|| CffError::NoSuchPiece(mv.to_string()))?;
    let kind = piece.kind;
    let (from, to) = (mv.from, mv.to);

    let forward_steps = (to.rank() as i8 - from.rank() as i8) * color.forward();
    let (dir, n) = if moves_straight(kind) && forward_steps == 0 {
        ('平', file_number(color, to.file()))
    } else {
        let dir = if forward_steps > 0 { '進' } else { '退' };
        if moves_straight(kind) {
            (dir, forward_steps.unsigned_abs())
        } else {
            (dir, file_number(color, to.file()))
        }
    };

    let column = file_column(position, color, kind, from.file());
    let mut out = String::with_capacity(12);
    if column.len() == 1 {
        out.push(emit_piece(color, kind));
        out.push(emit_numeral(color, file_number(color, from.file())));
    } else {
        let idx = column.iter().position(|&sq| sq == from).unwrap();
        let marker = match (column.len(), idx) {
            (2 | 3, 0) => '前',
            (2, 1) | (3, 2) => '後',
            (3, 1) => '中',
            (_, i) => emit_numeral(Color::Red, i as u8 + 1),
        };
        out.push(marker);
        let other_tandem_file = kind == PieceKind::Pawn
            && (0..9).any(|f| f != from.file() && file_column(position, color, kind, f).len() >= 2);
        if other_tandem_file {
            out.push(emit_numeral(color, file_number(color, from.file())));
        } else {
            out.push(emit_piece(color, kind));
        }
    }
    out.push(dir);
    out.push(emit_numeral(color, n));
    Ok(out)
}

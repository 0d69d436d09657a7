//! FEN: `<rank9>/<rank8>/.../<rank0> <w|b>`, optionally followed by extra
//! fields (castling placeholders, move counters) that are accepted and
//! ignored. Serialization always emits the two-field form.

use thiserror::Error;

use crate::board::{Color, InvariantViolation, Piece, Placement, Position, Square, SQUARE_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FenError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: &'static str },
    #[error("rank {rank} describes {found} files, expected 9")]
    RankLength { rank: u8, found: usize },
    #[error("invalid position: {0}")]
    InvariantViolation(#[from] InvariantViolation),
}

fn syntax(offset: usize, message: &'static str) -> FenError {
    FenError::Syntax { offset, message }
}

pub fn parse_fen(text: &str) -> Result<Position, FenError> {
    let text = text.trim_start();
    let placement_end = text.find(char::is_whitespace).unwrap_or(text.len());
    let placement = &text[..placement_end];

    let mut board: Placement = [None; SQUARE_COUNT];
    let mut rank: i32 = 9;
    let mut file: usize = 0;
    for (offset, c) in placement.char_indices() {
        match c {
            '/' => {
                if file != 9 {
                    return Err(FenError::RankLength { rank: rank as u8, found: file });
                }
                rank -= 1;
                file = 0;
                if rank < 0 {
                    return Err(syntax(offset, "more than 10 ranks"));
                }
            }
            '1'..='9' => {
                file += c as usize - '0' as usize;
                if file > 9 {
                    return Err(FenError::RankLength { rank: rank as u8, found: file });
                }
            }
            _ => {
                let piece = Piece::from_char(c).ok_or_else(|| syntax(offset, "unknown piece letter"))?;
                if file >= 9 {
                    return Err(FenError::RankLength { rank: rank as u8, found: file + 1 });
                }
                board[Square::new(file as u8, rank as u8).unwrap().index()] = Some(piece);
                file += 1;
            }
        }
    }
    if rank != 0 {
        return Err(syntax(placement.len(), "fewer than 10 ranks"));
    }
    if file != 9 {
        return Err(FenError::RankLength { rank: 0, found: file });
    }

    let rest = &text[placement_end..];
    let side_start = placement_end + (rest.len() - rest.trim_start().len());
    let side = match rest.split_whitespace().next() {
        Some("w") | Some("r") | Some("W") | Some("R") => Color::Red,
        Some("b") | Some("B") => Color::Black,
        Some(_) => return Err(syntax(side_start, "side to move must be w or b")),
        None => return Err(syntax(text.len(), "missing side to move")),
    };
    Ok(Position::new(board, side)?)
}

pub fn to_fen(position: &Position) -> String {
    let mut out = String::with_capacity(64);
    for rank in (0..10u8).rev() {
        let mut empty = 0;
        for file in 0..9u8 {
            match position.piece_at(Square::new(file, rank).unwrap()) {
                Some(p) => {
                    if empty > 0 {
                        out.push((b'0' + empty) as char);
                        empty = 0;
                    }
                    out.push(p.to_char());
                }
                None => empty += 1,
            }
        }
        if empty > 0 {
            out.push((b'0' + empty) as char);
        }
        if rank > 0 {
            out.push('/');
        }
    }
    out.push(' ');
    out.push(match position.side_to_move() {
        Color::Red => 'w',
        Color::Black => 'b',
    });
    out
}

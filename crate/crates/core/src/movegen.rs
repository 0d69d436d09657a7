//! Legal move generation, check detection, terminal classification and perft.

use serde::{Deserialize, Serialize};

use crate::board::{Color, Move, Piece, PieceKind, Position, Square};

const ORTHOGONAL: [(i8, i8); 4] = [(0, 1), (0, -1), (1, 0), (-1, 0)];
const DIAGONAL: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "loser", rename_all = "lowercase")]
pub enum GameStatus {
    Ongoing,
    /// Side to move is in check with no legal reply.
    Checkmate(Color),
    /// Side to move has no legal move but is not in check; it loses.
    Stalemate(Color),
}

/// All legal moves, ordered by `from * 90 + to`.
pub fn legal_moves(position: &Position) -> Vec<Move> {
    let mut moves = Vec::with_capacity(64);
    for (from, piece) in position.pieces() {
        if piece.color == position.side_to_move() {
            piece_moves(position, from, piece, &mut moves);
        }
    }
    moves.retain(|&mv| keeps_king_safe(position, mv));
    moves.sort_unstable();
    moves
}

/// True iff `mv` is in [`legal_moves`]. Never fails on junk input.
pub fn is_legal(position: &Position, mv: Move) -> bool {
    let Some(piece) = position.piece_at(mv.from) else { return false };
    if piece.color != position.side_to_move() {
        return false;
    }
    let mut moves = Vec::with_capacity(17);
    piece_moves(position, mv.from, piece, &mut moves);
    moves.contains(&mv) && keeps_king_safe(position, mv)
}

fn keeps_king_safe(position: &Position, mv: Move) -> bool {
    let child = position.apply_unchecked(mv);
    let mover = position.side_to_move();
    !is_in_check(&child, mover) && !kings_facing(&child)
}

/// Pseudo-legal destinations of the piece on `from`, appended to `out`.
fn piece_moves(position: &Position, from: Square, piece: Piece, out: &mut Vec<Move>) {
    let color = piece.color;
    let mut push = |to: Square| {
        if position.piece_at(to).is_none_or(|p| p.color != color) {
            out.push(Move { from, to });
        }
    };
    match piece.kind {
        PieceKind::King => {
            for (df, dr) in ORTHOGONAL {
                if let Some(to) = from.offset(df, dr).filter(|s| s.in_palace(color)) {
                    push(to);
                }
            }
        }
        PieceKind::Guard => {
            for (df, dr) in DIAGONAL {
                if let Some(to) = from.offset(df, dr).filter(|s| s.in_palace(color)) {
                    push(to);
                }
            }
        }
        PieceKind::Elephant => {
            for (df, dr) in DIAGONAL {
                let Some(eye) = from.offset(df, dr) else { continue };
                let Some(to) = from.offset(2 * df, 2 * dr) else { continue };
                if position.piece_at(eye).is_none() && color.own_half(to.rank()) {
                    push(to);
                }
            }
        }
        PieceKind::Knight => {
            for (df, dr) in ORTHOGONAL {
                let Some(leg) = from.offset(df, dr) else { continue };
                if position.piece_at(leg).is_some() {
                    continue;
                }
                // spread sideways from the leg, continuing outward
                let spreads = if df == 0 { [(1, dr), (-1, dr)] } else { [(df, 1), (df, -1)] };
                for (sf, sr) in spreads {
                    if let Some(to) = leg.offset(sf, sr) {
                        push(to);
                    }
                }
            }
        }
        PieceKind::Rook => {
            for (df, dr) in ORTHOGONAL {
                let mut cur = from;
                while let Some(to) = cur.offset(df, dr) {
                    push(to);
                    if position.piece_at(to).is_some() {
                        break;
                    }
                    cur = to;
                }
            }
        }
        PieceKind::Cannon => {
            for (df, dr) in ORTHOGONAL {
                let mut cur = from;
                let mut screened = false;
                while let Some(to) = cur.offset(df, dr) {
                    cur = to;
                    match (position.piece_at(to), screened) {
                        (None, false) => out.push(Move { from, to }),
                        (None, true) => {}
                        (Some(_), false) => screened = true,
                        (Some(p), true) => {
                            if p.color != color {
                                out.push(Move { from, to });
                            }
                            break;
                        }
                    }
                }
            }
        }
        PieceKind::Pawn => {
            if let Some(to) = from.offset(0, color.forward()) {
                push(to);
            }
            if !color.own_half(from.rank()) {
                for df in [1, -1] {
                    if let Some(to) = from.offset(df, 0) {
                        push(to);
                    }
                }
            }
        }
    }
}

/// Whether `color`'s king is attacked by any enemy piece. King facing is
/// reported separately by [`kings_facing`].
pub fn is_in_check(position: &Position, color: Color) -> bool {
    let Some(king) = position.king_square(color) else { return false };
    let enemy = color.opponent();
    let is_enemy = |sq: Square, kind: PieceKind| position.piece_at(sq) == Some(Piece::new(enemy, kind));

    for (df, dr) in ORTHOGONAL {
        let mut cur = king;
        let mut screens = 0;
        while let Some(sq) = cur.offset(df, dr) {
            cur = sq;
            if position.piece_at(sq).is_none() {
                continue;
            }
            if screens == 0 && is_enemy(sq, PieceKind::Rook) {
                return true;
            }
            if screens == 1 {
                if is_enemy(sq, PieceKind::Cannon) {
                    return true;
                }
                break;
            }
            screens += 1;
        }
    }

    // A knight at king + (df, dr) is blocked by the point one step from it
    // toward the king along its long leg.
    for (df, dr) in [(1, 2), (-1, 2), (1, -2), (-1, -2), (2, 1), (2, -1), (-2, 1), (-2, -1)] {
        let Some(sq) = king.offset(df, dr) else { continue };
        if !is_enemy(sq, PieceKind::Knight) {
            continue;
        }
        let leg = if dr.abs() == 2 { king.offset(df, dr / 2) } else { king.offset(df / 2, dr) };
        if leg.is_some_and(|leg| position.piece_at(leg).is_none()) {
            return true;
        }
    }

    if king.offset(0, -enemy.forward()).is_some_and(|sq| is_enemy(sq, PieceKind::Pawn)) {
        return true;
    }
    for df in [1, -1] {
        if let Some(sq) = king.offset(df, 0) {
            if is_enemy(sq, PieceKind::Pawn) && !enemy.own_half(sq.rank()) {
                return true;
            }
        }
    }
    false
}

/// Both kings on one file with nothing between them.
pub fn kings_facing(position: &Position) -> bool {
    let (Some(red), Some(black)) = (position.king_square(Color::Red), position.king_square(Color::Black)) else {
        return false;
    };
    if red.file() != black.file() {
        return false;
    }
    let (lo, hi) = (red.rank().min(black.rank()), red.rank().max(black.rank()));
    (lo + 1..hi).all(|rank| position.piece_at(Square::new(red.file(), rank).unwrap()).is_none())
}

pub fn game_status(position: &Position) -> GameStatus {
    if !legal_moves(position).is_empty() {
        return GameStatus::Ongoing;
    }
    let side = position.side_to_move();
    if is_in_check(position, side) {
        GameStatus::Checkmate(side)
    } else {
        GameStatus::Stalemate(side)
    }
}

/// Leaf count of the legal game tree to `depth` plies.
pub fn perft(position: &Position, depth: u32) -> u64 {
    match depth {
        0 => 1,
        1 => legal_moves(position).len() as u64,
        _ => legal_moves(position)
            .into_iter()
            .map(|mv| perft(&position.apply_unchecked(mv), depth - 1))
            .sum(),
    }
}

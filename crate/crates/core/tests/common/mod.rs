#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xiangqi_core::board::{Color, Move, Piece, PieceKind, Placement, Position, Square};
use xiangqi_core::movegen::legal_moves;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

fn at(b: &Placement, f: i32, r: i32) -> Option<Piece> {
    b[(r * 9 + f) as usize]
}

fn on_board(f: i32, r: i32) -> bool {
    (0..9).contains(&f) && (0..10).contains(&r)
}

fn in_palace(c: Color, f: i32, r: i32) -> bool {
    (3..=5).contains(&f)
        && match c {
            Color::Red => (0..=2).contains(&r),
            Color::Black => (7..=9).contains(&r),
        }
}

fn between(b: &Placement, (f0, r0): (i32, i32), (f1, r1): (i32, i32)) -> usize {
    let (df, dr) = ((f1 - f0).signum(), (r1 - r0).signum());
    let (mut f, mut r) = (f0 + df, r0 + dr);
    let mut n = 0;
    while (f, r) != (f1, r1) {
        n += at(b, f, r).is_some() as usize;
        f += df;
        r += dr;
    }
    n
}

/// Geometry-only test: can the piece on `from` reach `to`, ignoring checks.
fn pseudo(b: &Placement, from: usize, to: usize) -> bool {
    let Some(p) = b[from] else { return false };
    if let Some(t) = b[to] {
        if t.color == p.color {
            return false;
        }
    }
    let (f0, r0) = ((from % 9) as i32, (from / 9) as i32);
    let (f1, r1) = ((to % 9) as i32, (to / 9) as i32);
    let (df, dr) = (f1 - f0, r1 - r0);
    match p.kind {
        PieceKind::King => in_palace(p.color, f1, r1) && df.abs() + dr.abs() == 1,
        PieceKind::Guard => in_palace(p.color, f1, r1) && df.abs() == 1 && dr.abs() == 1,
        PieceKind::Elephant => {
            let home = match p.color {
                Color::Red => r1 <= 4,
                Color::Black => r1 >= 5,
            };
            home && df.abs() == 2 && dr.abs() == 2 && at(b, f0 + df / 2, r0 + dr / 2).is_none()
        }
        PieceKind::Knight => {
            if df.abs() == 1 && dr.abs() == 2 {
                at(b, f0, r0 + dr / 2).is_none()
            } else if df.abs() == 2 && dr.abs() == 1 {
                at(b, f0 + df / 2, r0).is_none()
            } else {
                false
            }
        }
        PieceKind::Rook => (df == 0 || dr == 0) && between(b, (f0, r0), (f1, r1)) == 0,
        PieceKind::Cannon => {
            if df != 0 && dr != 0 {
                return false;
            }
            let n = between(b, (f0, r0), (f1, r1));
            if b[to].is_some() {
                n == 1
            } else {
                n == 0
            }
        }
        PieceKind::Pawn => {
            let fwd = if p.color == Color::Red { 1 } else { -1 };
            let crossed = match p.color {
                Color::Red => r0 >= 5,
                Color::Black => r0 <= 4,
            };
            (df == 0 && dr == fwd) || (crossed && dr == 0 && df.abs() == 1)
        }
    }
}

fn king(b: &Placement, c: Color) -> Option<usize> {
    (0..90).find(|&i| b[i] == Some(Piece::new(c, PieceKind::King)))
}

fn exposed(b: &Placement, c: Color) -> bool {
    let Some(k) = king(b, c) else { return true };
    if let Some(o) = king(b, c.opponent()) {
        if k % 9 == o % 9 && between(b, ((k % 9) as i32, (k / 9) as i32), ((o % 9) as i32, (o / 9) as i32)) == 0 {
            return true;
        }
    }
    (0..90).any(|s| b[s].is_some_and(|p| p.color != c) && pseudo(b, s, k))
}

/// Legal moves by exhaustive from/to enumeration, in `from * 90 + to` order.
pub fn brute_force_legal(pos: &Position) -> Vec<Move> {
    let b = pos.placement();
    let side = pos.side_to_move();
    let mut out = Vec::new();
    for from in 0..90 {
        if b[from].map(|p| p.color) != Some(side) {
            continue;
        }
        for to in 0..90 {
            if from == to || !pseudo(b, from, to) {
                continue;
            }
            let mut next = *b;
            next[to] = next[from].take();
            if !exposed(&next, side) {
                out.push(Move::new(Square::from_index(from).unwrap(), Square::from_index(to).unwrap()).unwrap());
            }
        }
    }
    out
}

pub fn brute_force_perft(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = brute_force_legal(pos);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves.iter().map(|&m| brute_force_perft(&pos.apply_move(m).unwrap(), depth - 1)).sum()
}

/// Positions reached by uniformly random legal play from the start,
/// restarting whenever a game ends.
pub fn random_positions(seed: u64, n: usize) -> Vec<Position> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut pos = Position::start();
        let len = rng.gen_range(0..160);
        for _ in 0..len {
            let moves = legal_moves(&pos);
            if moves.is_empty() {
                break;
            }
            pos = pos.apply_move(moves[rng.gen_range(0..moves.len())]).unwrap();
        }
        out.push(pos);
    }
    out
}

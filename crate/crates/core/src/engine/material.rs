use crate::board::{Color, Move, Piece, PieceKind, Position};
use crate::engine::{red_positive, require_legal, EngineError, Evaluation, Oracle};
use crate::movegen::legal_moves;

/// Fixed centipawn weight of a piece standing on `rank`.
pub fn piece_weight(piece: Piece, rank: u8) -> i32 {
    match piece.kind {
        PieceKind::King => 0,
        PieceKind::Rook => 900,
        PieceKind::Cannon => 450,
        PieceKind::Knight => 400,
        PieceKind::Elephant | PieceKind::Guard => 200,
        PieceKind::Pawn if piece.color.own_half(rank) => 100,
        PieceKind::Pawn => 200,
    }
}

/// Red material minus Black material. Does not depend on the side to move.
pub fn material_eval(position: &Position) -> i32 {
    position
        .pieces()
        .map(|(sq, p)| {
            let w = piece_weight(p, sq.rank());
            if p.color == Color::Red {
                w
            } else {
                -w
            }
        })
        .sum()
}

/// Deterministic stand-in oracle: static material, one-ply greedy best move.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaterialOracle;

impl Oracle for MaterialOracle {
    fn evaluate(&mut self, position: &Position) -> Result<Evaluation, EngineError> {
        let mover = position.side_to_move();
        let mut best: Option<(i32, Move)> = None;
        for mv in legal_moves(position) {
            let benefit = red_positive(mover, material_eval(&position.apply_unchecked(mv)));
            if best.is_none_or(|(b, _)| benefit > b) {
                best = Some((benefit, mv));
            }
        }
        let (_, best_move) = best.ok_or(EngineError::GameOver)?;
        Ok(Evaluation { value: material_eval(position), best_move, is_mate_mapped: false })
    }

    fn evaluate_after(&mut self, position: &Position, mv: Move) -> Result<i32, EngineError> {
        Ok(material_eval(&require_legal(position, mv)?))
    }

    fn depth(&self) -> u32 {
        0
    }
}

//! Board primitives: colors, piece kinds, squares, moves and the immutable
//! [`Position`] value.
//!
//! Squares are indexed `rank * 9 + file`, with file `a` = 0 on Red's left and
//! rank 0 being Red's back rank. ICCS coordinates are therefore a direct
//! read-off of `(file, rank)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FILES: u8 = 9;
pub const RANKS: u8 = 10;
pub const SQUARE_COUNT: usize = 90;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Black,
}

impl Color {
    pub const BOTH: [Color; 2] = [Color::Red, Color::Black];

    pub fn opponent(self) -> Color {
        match self {
            Color::Red => Color::Black,
            Color::Black => Color::Red,
        }
    }

    /// Rank delta of one step "forward" for this color.
    pub fn forward(self) -> i8 {
        match self {
            Color::Red => 1,
            Color::Black => -1,
        }
    }

    /// Whether `rank` lies on this color's own half of the river.
    pub fn own_half(self, rank: u8) -> bool {
        match self {
            Color::Red => rank <= 4,
            Color::Black => rank >= 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Black => "black",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceKind {
    King,
    Guard,
    Elephant,
    Knight,
    Rook,
    Cannon,
    Pawn,
}

impl PieceKind {
    pub const ALL: [PieceKind; 7] = [
        PieceKind::King,
        PieceKind::Guard,
        PieceKind::Elephant,
        PieceKind::Knight,
        PieceKind::Rook,
        PieceKind::Cannon,
        PieceKind::Pawn,
    ];

    /// Uppercase FEN letter.
    pub fn letter(self) -> char {
        match self {
            PieceKind::King => 'K',
            PieceKind::Guard => 'A',
            PieceKind::Elephant => 'B',
            PieceKind::Knight => 'N',
            PieceKind::Rook => 'R',
            PieceKind::Cannon => 'C',
            PieceKind::Pawn => 'P',
        }
    }

    /// Accepts the canonical letters plus the common `E`/`H` aliases for
    /// elephant and horse. Case-insensitive.
    pub fn from_letter(c: char) -> Option<PieceKind> {
        Some(match c.to_ascii_uppercase() {
            'K' => PieceKind::King,
            'A' => PieceKind::Guard,
            'B' | 'E' => PieceKind::Elephant,
            'N' | 'H' => PieceKind::Knight,
            'R' => PieceKind::Rook,
            'C' => PieceKind::Cannon,
            'P' => PieceKind::Pawn,
            _ => return None,
        })
    }

    /// Pieces of this kind each side starts with.
    pub fn initial_count(self) -> usize {
        match self {
            PieceKind::King => 1,
            PieceKind::Pawn => 5,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PieceKind::King => "king",
            PieceKind::Guard => "guard",
            PieceKind::Elephant => "elephant",
            PieceKind::Knight => "knight",
            PieceKind::Rook => "rook",
            PieceKind::Cannon => "cannon",
            PieceKind::Pawn => "pawn",
        }
    }
}

impl fmt::Display for PieceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Piece {
    pub color: Color,
    pub kind: PieceKind,
}

impl Piece {
    pub const fn new(color: Color, kind: PieceKind) -> Piece {
        Piece { color, kind }
    }

    /// FEN character: uppercase for Red, lowercase for Black.
    pub fn to_char(self) -> char {
        let c = self.kind.letter();
        match self.color {
            Color::Red => c,
            Color::Black => c.to_ascii_lowercase(),
        }
    }

    pub fn from_char(c: char) -> Option<Piece> {
        let kind = PieceKind::from_letter(c)?;
        let color = if c.is_ascii_uppercase() { Color::Red } else { Color::Black };
        Some(Piece { color, kind })
    }

    /// Single Chinese glyph used in the alternate board rendering.
    pub fn glyph(self) -> char {
        match (self.color, self.kind) {
            (Color::Red, PieceKind::King) => '帥',
            (Color::Red, PieceKind::Guard) => '仕',
            (Color::Red, PieceKind::Elephant) => '相',
            (Color::Red, PieceKind::Knight) => '傌',
            (Color::Red, PieceKind::Rook) => '俥',
            (Color::Red, PieceKind::Cannon) => '炮',
            (Color::Red, PieceKind::Pawn) => '兵',
            (Color::Black, PieceKind::King) => '將',
            (Color::Black, PieceKind::Guard) => '士',
            (Color::Black, PieceKind::Elephant) => '象',
            (Color::Black, PieceKind::Knight) => '馬',
            (Color::Black, PieceKind::Rook) => '車',
            (Color::Black, PieceKind::Cannon) => '砲',
            (Color::Black, PieceKind::Pawn) => '卒',
        }
    }
}

/// A board point. Index is `rank * 9 + file`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square(u8);

impl Square {
    pub fn new(file: u8, rank: u8) -> Option<Square> {
        (file < FILES && rank < RANKS).then(|| Square(rank * FILES + file))
    }

    pub fn from_index(index: usize) -> Option<Square> {
        (index < SQUARE_COUNT).then(|| Square(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn file(self) -> u8 {
        self.0 % FILES
    }

    pub fn rank(self) -> u8 {
        self.0 / FILES
    }

    pub fn offset(self, file_delta: i8, rank_delta: i8) -> Option<Square> {
        let file = self.file() as i8 + file_delta;
        let rank = self.rank() as i8 + rank_delta;
        if (0..FILES as i8).contains(&file) && (0..RANKS as i8).contains(&rank) {
            Some(Square(rank as u8 * FILES + file as u8))
        } else {
            None
        }
    }

    /// Files d–f, ranks 0–2 for Red and 7–9 for Black.
    pub fn in_palace(self, color: Color) -> bool {
        let file_ok = (3..=5).contains(&self.file());
        let rank_ok = match color {
            Color::Red => self.rank() <= 2,
            Color::Black => self.rank() >= 7,
        };
        file_ok && rank_ok
    }

    pub fn all() -> impl Iterator<Item = Square> {
        (0..SQUARE_COUNT as u8).map(Square)
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", (b'a' + self.file()) as char, self.rank())
    }
}

impl FromStr for Square {
    type Err = ();

    fn from_str(s: &str) -> Result<Square, ()> {
        let b = s.as_bytes();
        if b.len() != 2 {
            return Err(());
        }
        let file = b[0].to_ascii_lowercase().wrapping_sub(b'a');
        let rank = b[1].wrapping_sub(b'0');
        Square::new(file, rank).ok_or(())
    }
}

/// A from/to pair. Ordering is by from-square index, then to-square index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub from: Square,
    pub to: Square,
}

impl Move {
    pub fn new(from: Square, to: Square) -> Option<Move> {
        (from != to).then_some(Move { from, to })
    }

    pub fn order_key(self) -> usize {
        self.from.index() * SQUARE_COUNT + self.to.index()
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("missing {0} king")]
    MissingKing(Color),
    #[error("more than one {0} king")]
    ExtraKing(Color),
    #[error("{0} king outside its palace")]
    KingOutsidePalace(Color),
    #[error("{color} has {count} {kind}s, more than the starting inventory")]
    Inventory { color: Color, kind: PieceKind, count: usize },
    #[error("{0} guard at {1} outside its palace")]
    GuardOutsidePalace(Color, Square),
    #[error("{0} elephant at {1} across the river")]
    ElephantAcrossRiver(Color, Square),
    #[error("{0} pawn at {1} behind its starting rank")]
    PawnBehindStart(Color, Square),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("no piece of the side to move on {0}")]
    NotMoversPiece(Square),
    #[error("destination {0} holds the mover's own piece")]
    OwnPieceCapture(Square),
}

pub type Placement = [Option<Piece>; SQUARE_COUNT];

/// Full board state: placement plus side to move. Immutable; successors are
/// fresh values.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Position {
    board: Placement,
    side: Color,
}

const START_BACK_RANK: [PieceKind; 9] = [
    PieceKind::Rook,
    PieceKind::Knight,
    PieceKind::Elephant,
    PieceKind::Guard,
    PieceKind::King,
    PieceKind::Guard,
    PieceKind::Elephant,
    PieceKind::Knight,
    PieceKind::Rook,
];

impl Position {
    pub fn start() -> Position {
        let mut board: Placement = [None; SQUARE_COUNT];
        for (color, back, cannon, pawn) in [(Color::Red, 0u8, 2u8, 3u8), (Color::Black, 9, 7, 6)] {
            for (file, kind) in START_BACK_RANK.iter().enumerate() {
                board[Square::new(file as u8, back).unwrap().index()] = Some(Piece::new(color, *kind));
            }
            for file in [1u8, 7] {
                board[Square::new(file, cannon).unwrap().index()] = Some(Piece::new(color, PieceKind::Cannon));
            }
            for file in [0u8, 2, 4, 6, 8] {
                board[Square::new(file, pawn).unwrap().index()] = Some(Piece::new(color, PieceKind::Pawn));
            }
        }
        Position { board, side: Color::Red }
    }

    /// Builds a position after checking every placement invariant.
    pub fn new(board: Placement, side: Color) -> Result<Position, InvariantViolation> {
        validate(&board)?;
        Ok(Position { board, side })
    }

    pub fn piece_at(&self, square: Square) -> Option<Piece> {
        self.board[square.index()]
    }

    pub fn side_to_move(&self) -> Color {
        self.side
    }

    pub fn placement(&self) -> &Placement {
        &self.board
    }

    pub fn piece_count(&self) -> usize {
        self.board.iter().filter(|p| p.is_some()).count()
    }

    pub fn pieces(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        self.board
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (Square(i as u8), p)))
    }

    pub fn king_square(&self, color: Color) -> Option<Square> {
        self.pieces()
            .find(|(_, p)| p.color == color && p.kind == PieceKind::King)
            .map(|(sq, _)| sq)
    }

    /// Same placement with the other side to move.
    pub fn with_side_to_move(&self, side: Color) -> Position {
        Position { board: self.board, side }
    }

    /// Relocates the piece and flips the side to move. Only checks that the
    /// mover owns the piece on `from` and is not capturing its own piece.
    pub fn apply_move(&self, mv: Move) -> Result<Position, MoveError> {
        match self.piece_at(mv.from) {
            Some(p) if p.color == self.side => {}
            _ => return Err(MoveError::NotMoversPiece(mv.from)),
        }
        if matches!(self.piece_at(mv.to), Some(p) if p.color == self.side) {
            return Err(MoveError::OwnPieceCapture(mv.to));
        }
        Ok(self.apply_unchecked(mv))
    }

    pub(crate) fn apply_unchecked(&self, mv: Move) -> Position {
        let mut board = self.board;
        board[mv.to.index()] = board[mv.from.index()].take();
        Position { board, side: self.side.opponent() }
    }

    /// Colors swapped and ranks flipped, other side to move. Material and
    /// legality are mirrored exactly.
    pub fn color_mirror(&self) -> Position {
        let mut board: Placement = [None; SQUARE_COUNT];
        for (sq, p) in self.pieces() {
            let target = Square::new(sq.file(), 9 - sq.rank()).unwrap();
            board[target.index()] = Some(Piece::new(p.color.opponent(), p.kind));
        }
        Position { board, side: self.side.opponent() }
    }

    /// Ten lines, rank 9 first, one ASCII glyph per file (`.` for empty).
    pub fn render_boardstr(&self) -> String {
        self.render_with(|p| p.map_or('.', Piece::to_char))
    }

    /// Same grid with Chinese piece glyphs and `＋` for empty points.
    pub fn render_board_chinese(&self) -> String {
        self.render_with(|p| p.map_or('＋', Piece::glyph))
    }

    fn render_with(&self, glyph: impl Fn(Option<Piece>) -> char) -> String {
        let mut out = String::with_capacity(110);
        for rank in (0..RANKS).rev() {
            for file in 0..FILES {
                out.push(glyph(self.piece_at(Square::new(file, rank).unwrap())));
            }
            out.push('\n');
        }
        out
    }
}

/// Reads back the grid produced by [`Position::render_boardstr`].
pub fn parse_boardstr(text: &str) -> Option<Placement> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() != RANKS as usize {
        return None;
    }
    let mut board: Placement = [None; SQUARE_COUNT];
    for (row, line) in lines.iter().enumerate() {
        let rank = 9 - row as u8;
        let chars: Vec<char> = line.trim().chars().collect();
        if chars.len() != FILES as usize {
            return None;
        }
        for (file, c) in chars.into_iter().enumerate() {
            if c != '.' {
                board[Square::new(file as u8, rank).unwrap().index()] = Some(Piece::from_char(c)?);
            }
        }
    }
    Some(board)
}

fn validate(board: &Placement) -> Result<(), InvariantViolation> {
    let mut counts = [[0usize; 7]; 2];
    for (i, p) in board.iter().enumerate() {
        let Some(p) = p else { continue };
        let sq = Square(i as u8);
        counts[p.color as usize][p.kind as usize] += 1;
        match p.kind {
            PieceKind::King if !sq.in_palace(p.color) => {
                return Err(InvariantViolation::KingOutsidePalace(p.color))
            }
            PieceKind::Guard if !sq.in_palace(p.color) => {
                return Err(InvariantViolation::GuardOutsidePalace(p.color, sq))
            }
            PieceKind::Elephant if !p.color.own_half(sq.rank()) => {
                return Err(InvariantViolation::ElephantAcrossRiver(p.color, sq))
            }
            PieceKind::Pawn => {
                let behind = match p.color {
                    Color::Red => sq.rank() < 3,
                    Color::Black => sq.rank() > 6,
                };
                if behind {
                    return Err(InvariantViolation::PawnBehindStart(p.color, sq));
                }
            }
            _ => {}
        }
    }
    for color in Color::BOTH {
        match counts[color as usize][PieceKind::King as usize] {
            0 => return Err(InvariantViolation::MissingKing(color)),
            1 => {}
            _ => return Err(InvariantViolation::ExtraKing(color)),
        }
        for kind in PieceKind::ALL {
            let count = counts[color as usize][kind as usize];
            if count > kind.initial_count() {
                return Err(InvariantViolation::Inventory { color, kind, count });
            }
        }
    }
    Ok(())
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Position({})", crate::notation::fen::to_fen(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(s: &str) -> Square {
        s.parse().unwrap()
    }

    #[test]
    fn start_position_occupants() {
        let p = Position::start();
        assert_eq!(p.piece_at(sq("e0")), Some(Piece::new(Color::Red, PieceKind::King)));
        assert_eq!(p.piece_at(sq("e4")), None);
        assert_eq!(p.piece_at(sq("b2")), Some(Piece::new(Color::Red, PieceKind::Cannon)));
        assert_eq!(p.piece_at(sq("h7")), Some(Piece::new(Color::Black, PieceKind::Cannon)));
        assert_eq!(p.piece_count(), 32);
        assert_eq!(p.side_to_move(), Color::Red);
    }

    #[test]
    fn apply_move_relocates_and_flips_side() {
        let p = Position::start();
        let next = p.apply_move(Move::new(sq("h2"), sq("e2")).unwrap()).unwrap();
        assert_eq!(next.piece_at(sq("e2")), Some(Piece::new(Color::Red, PieceKind::Cannon)));
        assert_eq!(next.piece_at(sq("h2")), None);
        assert_eq!(next.side_to_move(), Color::Black);
        // input untouched
        assert_eq!(p.piece_at(sq("h2")).map(|p| p.kind), Some(PieceKind::Cannon));

        let rook = p.apply_move(Move::new(sq("a0"), sq("a1")).unwrap()).unwrap();
        assert_eq!(rook.piece_at(sq("a1")).map(|p| p.kind), Some(PieceKind::Rook));
    }

    #[test]
    fn apply_move_errors() {
        let p = Position::start();
        assert_eq!(
            p.apply_move(Move::new(sq("a9"), sq("a8")).unwrap()),
            Err(MoveError::NotMoversPiece(sq("a9")))
        );
        assert_eq!(
            p.apply_move(Move::new(sq("e4"), sq("e5")).unwrap()),
            Err(MoveError::NotMoversPiece(sq("e4")))
        );
        assert_eq!(
            p.apply_move(Move::new(sq("a0"), sq("b0")).unwrap()),
            Err(MoveError::OwnPieceCapture(sq("b0")))
        );
    }

    #[test]
    fn capture_reduces_count_by_one() {
        // h2 cannon jumps the h7 cannon onto the h9 knight
        let p = Position::start();
        let next = p.apply_move(Move::new(sq("h2"), sq("h9")).unwrap()).unwrap();
        assert_eq!(next.piece_count(), 31);
    }

    #[test]
    fn boardstr_layout_and_round_trip() {
        let p = Position::start();
        let text = p.render_boardstr();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[0], "rnbakabnr");
        assert_eq!(lines[2], ".c.....c.");
        assert_eq!(lines[9], "RNBAKABNR");
        assert_eq!(&parse_boardstr(&text).unwrap(), p.placement());
    }

    #[test]
    fn boardstr_bare_kings() {
        let mut board: Placement = [None; SQUARE_COUNT];
        board[sq("e0").index()] = Some(Piece::new(Color::Red, PieceKind::King));
        board[sq("d9").index()] = Some(Piece::new(Color::Black, PieceKind::King));
        let p = Position::new(board, Color::Red).unwrap();
        assert_eq!(p.piece_count(), 2);
        let text = p.render_boardstr();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "...k.....");
        assert_eq!(lines[9], "....K....");
        assert_eq!(lines.iter().filter(|l| **l == ".........").count(), 8);
    }

    #[test]
    fn invariants_rejected() {
        let mut board = *Position::start().placement();
        board[sq("e4").index()] = Some(Piece::new(Color::Red, PieceKind::Rook));
        assert!(matches!(
            Position::new(board, Color::Red),
            Err(InvariantViolation::Inventory { kind: PieceKind::Rook, .. })
        ));

        let mut board: Placement = [None; SQUARE_COUNT];
        board[sq("e0").index()] = Some(Piece::new(Color::Red, PieceKind::King));
        assert_eq!(Position::new(board, Color::Red), Err(InvariantViolation::MissingKing(Color::Black)));

        board[sq("e9").index()] = Some(Piece::new(Color::Black, PieceKind::King));
        board[sq("c5").index()] = Some(Piece::new(Color::Red, PieceKind::Elephant));
        assert!(matches!(Position::new(board, Color::Red), Err(InvariantViolation::ElephantAcrossRiver(..))));
        board[sq("c5").index()] = None;
        board[sq("e2").index()] = Some(Piece::new(Color::Red, PieceKind::Pawn));
        assert!(matches!(Position::new(board, Color::Red), Err(InvariantViolation::PawnBehindStart(..))));
        board[sq("e2").index()] = None;
        board[sq("c1").index()] = Some(Piece::new(Color::Red, PieceKind::Guard));
        assert!(matches!(Position::new(board, Color::Red), Err(InvariantViolation::GuardOutsidePalace(..))));
        board[sq("c1").index()] = None;
        board[sq("e0").index()] = None;
        board[sq("e3").index()] = Some(Piece::new(Color::Red, PieceKind::King));
        assert_eq!(Position::new(board, Color::Red), Err(InvariantViolation::KingOutsidePalace(Color::Red)));
    }

    #[test]
    fn square_text_round_trip() {
        for s in Square::all() {
            assert_eq!(s.to_string().parse::<Square>(), Ok(s));
        }
        assert!("j1".parse::<Square>().is_err());
        assert!("a10".parse::<Square>().is_err());
    }

    #[test]
    fn mirror_is_an_involution() {
        let p = Position::start().apply_move(Move::new(sq("h2"), sq("e2")).unwrap()).unwrap();
        assert_eq!(p.color_mirror().color_mirror(), p);
    }
}

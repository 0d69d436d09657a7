use crate::board::Position;
use crate::notation::to_fen;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptMode {
    /// Move only.
    Stage1,
    /// Situation assessment plus move.
    Full,
}

const RULES: &str = "\
Rules summary:
- Each side has 16 pieces and the players alternate moves. The aim is to checkmate the opposing king.
- K/k King: one step orthogonally, inside the palace. The two kings may never stand on the same file with nothing between them.
- A/a Guard: one step diagonally, inside the palace.
- B/b Elephant: two steps diagonally, never across the river, blocked when the middle point is occupied.
- N/n Knight: one step orthogonally then one step diagonally outward, blocked when the orthogonal point is occupied.
- R/r Rook: any distance along a rank or file.
- C/c Cannon: moves like a rook, but captures only by jumping over exactly one piece.
- P/p Pawn: one step forward; once across the river it may also step sideways; never backward.

Move format (ICCS):
- Four characters: the source square followed by the destination square.
- Files are a to i from left to right; ranks are 0 to 9 from bottom (Red) to top (Black).
- Example: h2e2 moves the piece on h2 to e2.

FEN format:
- Uppercase letters are Red pieces, lowercase letters are Black pieces.
- Letters: K/k king, A/a guard, B/b elephant, N/n knight, R/r rook, C/c cannon, P/p pawn.
- A digit counts consecutive empty points; '/' separates the ten ranks, top rank first.
- 'w' means Red to move, 'b' means Black to move.
";

/// Fills the fixed prompt template for `position`. Byte-deterministic.
pub fn build_prompt(position: &Position, mode: PromptMode) -> String {
    let mut out = String::with_capacity(2048);
    match mode {
        PromptMode::Full => out.push_str(
            "You are a Xiangqi (Chinese Chess) expert. The current position is given below. \
             Assess the situation and recommend the best next move.\n\n\
             Task:\n\
             - Assess the position as exactly one of: balanced, slight advantage for Red, slight advantage for Black, \
             significant advantage for Red, significant advantage for Black.\n\
             - Recommend the best next move.\n\n",
        ),
        PromptMode::Stage1 => out.push_str(
            "You are a Xiangqi (Chinese Chess) expert. The current position is given below. \
             Recommend the best next move.\n\n\
             Task:\n\
             - Recommend the best next move.\n\n",
        ),
    }
    out.push_str(RULES);
    out.push('\n');
    out.push_str("Board FEN: ");
    out.push_str(&to_fen(position));
    out.push_str("\n\nText Description of Board:\n");
    out.push_str(&position.render_boardstr());
    out.push_str("\nAnswer in exactly this format:\n");
    if mode == PromptMode::Full {
        out.push_str("Situation Analysis: <your assessment>\n");
    }
    out.push_str("Best Move: <move in ICCS>\n");
    out
}

//! Regenerates the checked-in test fixtures under `tests/fixtures/`.
//!
//!     cargo run -p xiangqi-core --example gen_fixtures
//!
//! Output is a pure function of the seeds below.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use xiangqi_core::board::{Color, Position};
use xiangqi_core::dataset::{classify_situation, SituationLabel3, SituationLabel5};
use xiangqi_core::engine::{MaterialOracle, Oracle, ScoredMoveSet};
use xiangqi_core::movegen::legal_moves;
use xiangqi_core::notation::pgn::{write_pgn, GameRecord, GameResult, MoveFormat, Ply};
use xiangqi_core::notation::{move_to_iccs, to_fen};

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

fn playout(rng: &mut ChaCha8Rng, from: &Position, plies: usize) -> Vec<Ply> {
    let mut pos = from.clone();
    let mut out = Vec::new();
    for _ in 0..plies {
        let moves = legal_moves(&pos);
        if moves.is_empty() {
            break;
        }
        let mv = moves[rng.gen_range(0..moves.len())];
        out.push(Ply { mv, comment: None, token: move_to_iccs(mv) });
        pos = pos.apply_move(mv).unwrap();
    }
    out
}

fn record(index: usize, start: Position, plies: Vec<Ply>, result: GameResult, format: &str) -> GameRecord {
    let mut metadata = vec![
        ("Game".to_owned(), "Chinese Chess".to_owned()),
        ("Event".to_owned(), "fixture".to_owned()),
        ("Round".to_owned(), (index + 1).to_string()),
        ("Result".to_owned(), result.as_tag().to_owned()),
        ("Format".to_owned(), format.to_owned()),
    ];
    if start != Position::start() {
        metadata.push(("FEN".to_owned(), to_fen(&start)));
    }
    GameRecord { index, metadata, start, plies, result, preamble: None }
}

const RESULTS: [GameResult; 3] = [GameResult::RedWin, GameResult::BlackWin, GameResult::Draw];
const CHATTER: [&str; 6] = ["红方先手", "black keeps the pressure", "好棋", "a quiet move", "黑方反击，攻势猛烈", "Red has a slight advantage"];

fn games50() -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut text = String::new();
    let mut fens = String::new();
    for i in 0..50 {
        let start = if i % 10 == 9 {
            let pre = playout(&mut rng, &Position::start(), 8);
            pre.iter().fold(Position::start(), |p, ply| p.apply_move(ply.mv).unwrap())
        } else {
            Position::start()
        };
        let len = rng.gen_range(6..60);
        let mut plies = playout(&mut rng, &start, len);
        for ply in plies.iter_mut() {
            if rng.gen_ratio(1, 8) {
                ply.comment = Some(CHATTER[rng.gen_range(0..CHATTER.len())].to_owned());
            }
        }
        let (format, label) = if i % 2 == 0 { (MoveFormat::Cff, "CFF") } else { (MoveFormat::Iccs, "ICCS") };
        let game = record(i, start, plies, RESULTS[i % 3], label);
        text.push_str(&write_pgn(&game, format));
        fens.push_str(&to_fen(&game.final_position()));
        fens.push('\n');
    }
    (text, fens)
}

const CORRUPT: &str = r#"[Game "Chinese Chess"]
[Event "corrupt: illegal ply"]
[Result "1-0"]

1. h2e2 h9g7 2. h0g2 a9a2 1-0

[Game "Chinese Chess"]
[Event "corrupt: unparsable token"]
[Result "0-1"]

1. 炮二平五 马8进7 2. 马二进三 @@@ 0-1

[Game "Chinese Chess"]
[Event "corrupt: missing result"]

1. h2e2 h9g7 2. h0g2 i9h9
"#;

fn pipeline10() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let results = [
        GameResult::RedWin,
        GameResult::BlackWin,
        GameResult::Draw,
        GameResult::RedWin,
        GameResult::BlackWin,
        GameResult::Unknown,
        GameResult::RedWin,
        GameResult::Draw,
        GameResult::BlackWin,
        GameResult::RedWin,
    ];
    let mut text = String::new();
    for (i, result) in results.into_iter().enumerate() {
        let len = rng.gen_range(16..40);
        let mut plies = playout(&mut rng, &Position::start(), len);
        for ply in plies.iter_mut() {
            if rng.gen_ratio(1, 3) {
                ply.comment = Some(CHATTER[rng.gen_range(0..CHATTER.len())].to_owned());
            }
        }
        let format = if i % 2 == 0 { MoveFormat::Cff } else { MoveFormat::Iccs };
        text.push_str(&write_pgn(&record(i, Position::start(), plies, result, "mixed"), format));
    }
    text
}

fn label3(l: SituationLabel5) -> SituationLabel3 {
    l.coarsen()
}

/// Positions sampled from playouts, scored by the material evaluator, plus
/// planted transcripts whose metric values are tallied here by case.
fn evaluation() -> (String, String, String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut tests = String::new();
    let mut best_agent = String::new();
    let mut planted = String::new();
    let mut hits = [[0usize; 2]; 5];
    let mut seen = std::collections::HashSet::new();
    let mut n = 0;
    while n < 20 {
        let len = rng.gen_range(4..120);
        let plies = playout(&mut rng, &Position::start(), len);
        let pos = plies.iter().fold(Position::start(), |p, ply| p.apply_move(ply.mv).unwrap());
        if legal_moves(&pos).len() < 2 || !seen.insert(to_fen(&pos)) {
            continue;
        }
        let set: ScoredMoveSet = MaterialOracle.score_all_moves(&pos).unwrap();
        let value = MaterialOracle.evaluate(&pos).unwrap().value;
        let truth = classify_situation(value, 100, 800);
        let fen = to_fen(&pos);
        let rec = set.to_record();
        tests.push_str(
            &json!({
                "fen": fen,
                "label5": truth,
                "label3": label3(truth),
                "scored": rec.entries,
                "best_value": set.best_value(),
                "depth": 0,
                "piece_count": pos.piece_count(),
                "side": pos.side_to_move(),
            })
            .to_string(),
        );
        tests.push('\n');

        let best = set.best_moves()[0];
        let red = pos.side_to_move() == Color::Red;
        let worst = set
            .entries()
            .iter()
            .min_by_key(|e| if red { e.value } else { -e.value })
            .unwrap();
        let worst_good = (worst.value - set.best_value()).abs() <= 100;
        let worst_best = worst.value == set.best_value();
        let right = truth.phrase();
        let wrong = SituationLabel5::ALL.iter().find(|l| l.coarsen() != truth.coarsen()).unwrap().phrase();
        let illegal = "a0a0";
        let answer = |mv: &str, label: &str| {
            format!("<Think>look</Think><Answer>Situation Analysis: {label}\nBest Move: {mv}</Answer>")
        };
        let best_s = move_to_iccs(best);
        let worst_s = move_to_iccs(worst.mv);
        // (sample texts, per-metric hit at @1, per-metric hit at @3) with metrics
        // ordered legal, good, best, class3, class5 under joint gating
        let (samples, at1, at3): ([String; 3], [bool; 5], [bool; 5]) = match n % 5 {
            0 => (
                [answer(illegal, wrong), answer(illegal, right), "no format".into()],
                [false; 5],
                [false; 5],
            ),
            1 => ([answer(&best_s, right), answer(illegal, wrong), answer(illegal, wrong)], [true; 5], [true; 5]),
            2 => ([answer(illegal, right), answer(&best_s, right), answer(illegal, wrong)], [false; 5], [true; 5]),
            3 => (
                [answer(&worst_s, right), answer(&worst_s, wrong), answer(&worst_s, wrong)],
                [true, worst_good, worst_best, true, true],
                [true, worst_good, worst_best, true, true],
            ),
            _ => (
                [answer(&best_s, wrong), answer(illegal, right), answer(&worst_s, right)],
                [true, true, true, false, false],
                [true, true, true, true, true],
            ),
        };
        for (m, (a, b)) in at1.iter().zip(at3.iter()).enumerate() {
            hits[m][0] += *a as usize;
            hits[m][1] += *b as usize;
        }
        for (i, s) in samples.iter().enumerate() {
            planted.push_str(&json!({"fen": fen, "sample_index": i, "raw_text": s}).to_string());
            planted.push('\n');
            let best_text = answer(&best_s, right);
            best_agent.push_str(&json!({"fen": fen, "sample_index": i, "raw_text": best_text}).to_string());
            best_agent.push('\n');
        }
        n += 1;
    }
    let names = ["legal", "good", "best", "3-class", "5-class"];
    let mut expected = serde_json::Map::new();
    for (m, name) in names.iter().enumerate() {
        expected.insert(format!("{name}@1"), json!(hits[m][0]));
        expected.insert(format!("{name}@3"), json!(hits[m][1]));
    }
    let expected = serde_json::to_string_pretty(&json!({"positions": 20, "hits": expected})).unwrap() + "\n";
    (tests, planted, best_agent, expected)
}

fn main() {
    let d = dir();
    fs::create_dir_all(&d).unwrap();
    let (text, fens) = games50();
    fs::write(d.join("games50.pgn"), text).unwrap();
    fs::write(d.join("games50.fens"), fens).unwrap();
    fs::write(d.join("corrupt.pgn"), CORRUPT).unwrap();

    let gb = "[Game \"Chinese Chess\"]\n[Event \"编码测试\"]\n[Result \"1-0\"]\n\n1. 炮二平五 {红方中炮开局} 马8进7\n2. 马二进三 车9平8 1-0\n\n";
    fs::write(d.join("gb18030.utf8.pgn"), gb).unwrap();
    let (bytes, _, bad) = encoding_rs::GB18030.encode(gb);
    assert!(!bad);
    fs::write(d.join("gb18030.pgn"), bytes).unwrap();

    fs::write(d.join("pipeline10.pgn"), pipeline10()).unwrap();

    let (tests, planted, best, expected) = evaluation();
    fs::write(d.join("eval_test.jsonl"), tests).unwrap();
    fs::write(d.join("eval_planted.jsonl"), planted).unwrap();
    fs::write(d.join("eval_best_agent.jsonl"), best).unwrap();
    fs::write(d.join("eval_planted_expected.json"), expected).unwrap();
    println!("fixtures written to {}", d.display());
}

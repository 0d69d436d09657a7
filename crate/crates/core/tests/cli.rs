mod common;

use serde_json::Value;
use xiangqi_core::cli::run;

const START: &str = "rnbakabnr/9/1c5c1/p1p1p1p1p/9/9/P1P1P1P1P/1C5C1/9/RNBAKABNR w";

fn xq(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("xiangqi").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s.trim()).unwrap_or_else(|e| panic!("{e}: {s}"))
}

#[test]
fn moves_and_perft() {
    let (code, out, _) = xq(&["moves", START]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 44);
    let (_, out, _) = xq(&["perft", START, "2"]);
    assert!(out.contains("1920"));
    let (_, out, _) = xq(&["moves", START, "--notation", "cff"]);
    assert!(out.lines().any(|l| l.contains("炮二平五")));
}

#[test]
fn convert_both_ways() {
    let (code, out, _) = xq(&["convert", START, "h2e2"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "炮二平五");
    let (_, out, _) = xq(&["convert", START, "炮二平五", "--to", "iccs"]);
    assert_eq!(out.trim(), "h2e2");
}

#[test]
fn errors_are_json_with_exit_codes() {
    let (code, out, err) = xq(&["fen", "not a fen"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert_eq!(json(&err)["error"], "bad_fen");
    let (code, _, err) = xq(&["no-such-command"]);
    assert_eq!(code, 2);
    assert!(json(&err)["message"].is_string());
    let (code, _, _) = xq(&["perft", START]);
    assert_eq!(code, 2);
}

#[test]
fn parse_pgn_reports_rejects() {
    let path = common::fixture("corrupt.pgn");
    let (code, out, _) = xq(&["parse-pgn", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let kinds: Vec<String> = out.lines().map(|l| json(l)["reason"]["kind"].as_str().unwrap().to_owned()).collect();
    assert_eq!(kinds, ["illegal_ply", "unparsable_token", "missing_result"]);
}

#[test]
fn reward_and_advantages() {
    let response = "<Think>x</Think><Answer>Situation Analysis: balanced\nBest Move: b2b9</Answer>";
    let (code, out, _) = xq(&["reward", START, "--truth", "balanced", "--response", response]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["reward"]["total"], 5);
    assert_eq!(v["reward"]["r_move"], 3);

    let (_, out, _) = xq(&["reward", "--group", "1,2,3,2"]);
    let adv: Vec<f64> = serde_json::from_value(json(&out)["advantages"].clone()).unwrap();
    assert!((adv[2] - std::f64::consts::SQRT_2).abs() < 1e-6);
    let (code, _, err) = xq(&["reward", "--group", "1"]);
    assert_eq!(code, 1);
    assert_eq!(json(&err)["error"], "bad_group");
}

#[test]
fn evaluate_planted_transcripts() {
    let test = common::fixture("eval_test.jsonl");
    let planted = common::fixture("eval_planted.jsonl");
    let (code, out, _) = xq(&["evaluate", test.to_str().unwrap(), planted.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report = json(&out);
    let expected = json(&std::fs::read_to_string(common::fixture("eval_planted_expected.json")).unwrap());
    for v in report["overall"]["values"].as_array().unwrap() {
        let column = v["column"].as_str().unwrap();
        assert_eq!(v["hits"], expected["hits"][column], "{column}");
    }
    let (_, table, _) = xq(&["evaluate", test.to_str().unwrap(), planted.to_str().unwrap(), "--pretty"]);
    let header: Vec<&str> = table.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(
        header[2..],
        ["legal@1", "legal@3", "good@1", "good@3", "best@1", "best@3", "3-class@1", "3-class@3", "5-class@1", "5-class@3"]
    );
}

#[test]
fn build_dataset_writes_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let pgn = dir.path().join("pgn");
    std::fs::create_dir(&pgn).unwrap();
    std::fs::copy(common::fixture("pipeline10.pgn"), pgn.join("a.pgn")).unwrap();
    let out = dir.path().join("out");
    let (code, stdout, err) =
        xq(&["build-dataset", pgn.to_str().unwrap(), "--out", out.to_str().unwrap(), "--test-per-count", "2"]);
    assert_eq!(code, 0, "{err}");
    let funnel = json(&stdout)["funnel"].clone();
    for f in ["stage1.jsonl", "stage2.jsonl", "stage3.jsonl", "test.jsonl", "rejects.jsonl", "funnel.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let lines = |f: &str| std::fs::read_to_string(out.join(f)).unwrap().lines().count() as u64;
    assert_eq!(funnel["stage1"], lines("stage1.jsonl"));
    assert_eq!(funnel["stage2"], lines("stage2.jsonl"));
    assert_eq!(funnel["stage3"], lines("stage3.jsonl"));
    assert_eq!(funnel["test"], lines("test.jsonl"));
}

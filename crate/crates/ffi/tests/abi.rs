use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use xiangqi_ffi::*;

const START: &str = "rnbakabnr/9/1c5c1/p1p1p1p1p/9/9/P1P1P1P1P/1C5C1/9/RNBAKABNR w";

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { xq_string_free(s) };
    out
}

fn start() -> *mut XqPosition {
    let fen = CString::new(START).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { xq_position_from_fen(fen.as_ptr(), &mut p) }, XqStatus::Ok);
    p
}

#[test]
fn position_round_trip() {
    let p = start();
    let mut fen = ptr::null_mut();
    assert_eq!(unsafe { xq_position_to_fen(p, &mut fen) }, XqStatus::Ok);
    assert_eq!(take(fen), START);
    let mut n = 0usize;
    assert_eq!(unsafe { xq_position_legal_move_count(p, &mut n) }, XqStatus::Ok);
    assert_eq!(n, 44);
    let mut moves = ptr::null_mut();
    assert_eq!(unsafe { xq_position_legal_moves(p, &mut moves) }, XqStatus::Ok);
    assert_eq!(take(moves).split(' ').count(), 44);
    let mut nodes = 0u64;
    assert_eq!(unsafe { xq_position_perft(p, 2, &mut nodes) }, XqStatus::Ok);
    assert_eq!(nodes, 1920);
    let mut count = 0usize;
    assert_eq!(unsafe { xq_position_piece_count(p, &mut count) }, XqStatus::Ok);
    assert_eq!(count, 32);
    unsafe { xq_position_free(p) };
}

#[test]
fn moves_and_notation() {
    let p = start();
    let h2e2 = CString::new("h2e2").unwrap();
    let mut legal = false;
    assert_eq!(unsafe { xq_position_is_legal(p, h2e2.as_ptr(), &mut legal) }, XqStatus::Ok);
    assert!(legal);
    let mut cff = ptr::null_mut();
    assert_eq!(unsafe { xq_move_to_cff(p, h2e2.as_ptr(), &mut cff) }, XqStatus::Ok);
    let cff = take(cff);
    assert_eq!(cff, "炮二平五");
    let cff_c = CString::new(cff).unwrap();
    let mut iccs = ptr::null_mut();
    assert_eq!(unsafe { xq_move_from_cff(p, cff_c.as_ptr(), &mut iccs) }, XqStatus::Ok);
    assert_eq!(take(iccs), "h2e2");

    let mut next = ptr::null_mut();
    assert_eq!(unsafe { xq_position_apply_move(p, h2e2.as_ptr(), &mut next) }, XqStatus::Ok);
    let mut side = XqColor::Red;
    assert_eq!(unsafe { xq_position_side_to_move(next, &mut side) }, XqStatus::Ok);
    assert_eq!(side, XqColor::Black);

    let bad = CString::new("a0a5").unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(unsafe { xq_position_apply_move(p, bad.as_ptr(), &mut none) }, XqStatus::IllegalMove);
    assert!(none.is_null());
    let msg = take(xq_last_error_message());
    assert!(msg.contains("a0a5"));
    unsafe {
        xq_position_free(next);
        xq_position_free(p);
    }
}

#[test]
fn errors_are_codes_not_crashes() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { xq_position_from_fen(ptr::null(), &mut p) }, XqStatus::NullPointer);
    let junk = CString::new("xyz w").unwrap();
    assert_eq!(unsafe { xq_position_from_fen(junk.as_ptr(), &mut p) }, XqStatus::ParseError);
    assert!(!xq_last_error_message().is_null());
    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { xq_position_from_fen(invalid.as_ptr().cast(), &mut p) }, XqStatus::InvalidUtf8);
    let mut n = 0usize;
    assert_eq!(unsafe { xq_position_legal_move_count(ptr::null(), &mut n) }, XqStatus::NullPointer);
    let mut l3 = XqLabel3::Balanced;
    assert_eq!(unsafe { xq_coarsen_label(9, &mut l3) }, XqStatus::InvalidArgument);
    assert_eq!(unsafe { xq_coarsen_label(XqLabel5::SlightAdvRed as u32, &mut l3) }, XqStatus::Ok);
    assert_eq!(l3, XqLabel3::AdvRed);
    // success clears the stored message
    assert!(xq_last_error_message().is_null());
    unsafe {
        xq_position_free(ptr::null_mut());
        xq_string_free(ptr::null_mut());
    }
}

#[test]
fn labels_rewards_and_advantages() {
    assert_eq!(xq_classify_situation(100, 100, 800), XqLabel5::Balanced);
    assert_eq!(xq_classify_situation(-101, 100, 800), XqLabel5::SlightAdvBlack);
    assert_eq!(xq_classify_situation(800, 100, 800), XqLabel5::ClearAdvRed);

    let p = start();
    let mut set = ptr::null_mut();
    assert_eq!(unsafe { xq_scored_set_material(p, &mut set) }, XqStatus::Ok);
    let mut best = 0;
    assert_eq!(unsafe { xq_scored_set_best_value(set, &mut best) }, XqStatus::Ok);
    assert_eq!(best, 400);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { xq_scored_set_to_json(set, &mut json) }, XqStatus::Ok);
    let json = CString::new(take(json)).unwrap();
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { xq_scored_set_from_json(json.as_ptr(), &mut again) }, XqStatus::Ok);

    let b2b9 = CString::new("b2b9").unwrap();
    let mut r = XqMoveReward::default();
    assert_eq!(unsafe { xq_reward_move(again, b2b9.as_ptr(), 100, &mut r) }, XqStatus::Ok);
    assert_eq!(r, XqMoveReward { r_legal: 1, r_good: 1, r_best: 1, r_move: 3 });
    assert_eq!(unsafe { xq_reward_move(again, ptr::null(), 100, &mut r) }, XqStatus::Ok);
    assert_eq!(r.r_move, 0);

    let text = CString::new("<Think>t</Think><Answer>Situation Analysis: significant advantage for Red\nBest Move: b2b9</Answer>").unwrap();
    let mut total = XqRewardBreakdown::default();
    let status = unsafe {
        xq_total_reward(again, text.as_ptr(), XqResponseFormat::Tagged as u32, XqLabel5::ClearAdvRed as u32, 100, 5, &mut total)
    };
    assert_eq!(status, XqStatus::Ok);
    assert_eq!(total.total, 5);
    let status = unsafe { xq_total_reward(again, text.as_ptr(), 0, 2, 100, 4, &mut total) };
    assert_eq!(status, XqStatus::InvalidArgument);

    let rewards = [1.0, 2.0, 3.0, 2.0];
    let mut adv = [0.0; 4];
    assert_eq!(unsafe { xq_group_relative_advantage(rewards.as_ptr(), 4, adv.as_mut_ptr()) }, XqStatus::Ok);
    assert!((adv[2] - std::f64::consts::SQRT_2).abs() < 1e-6);
    assert_eq!(unsafe { xq_group_relative_advantage(rewards.as_ptr(), 1, adv.as_mut_ptr()) }, XqStatus::InvalidArgument);

    unsafe {
        xq_scored_set_free(set);
        xq_scored_set_free(again);
        xq_position_free(p);
    }
}

/// Compiles a small C program against the generated header and the static
/// library. Skipped when no C compiler or library artifact is available.
#[test]
fn c_program_links_and_runs() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = root.join("include");
    assert!(header_dir.join("xiangqi.h").exists());
    let target = root.join("../../target/debug");
    let lib = target.join("libxiangqi_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or {} missing", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "xiangqi.h"
int main(void) {
    XqPosition *p = xq_position_start();
    size_t n = 0;
    if (xq_position_legal_move_count(p, &n) != XQ_STATUS_OK || n != 44) return 1;
    uint64_t nodes = 0;
    if (xq_position_perft(p, 3, &nodes) != XQ_STATUS_OK || nodes != 79666) return 2;
    char *cff = NULL;
    if (xq_move_to_cff(p, "h2e2", &cff) != XQ_STATUS_OK) return 3;
    if (strcmp(cff, "\xe7\x82\xae\xe4\xba\x8c\xe5\xb9\xb3\xe4\xba\x94") != 0) return 4;
    xq_string_free(cff);
    XqPosition *q = NULL;
    if (xq_position_apply_move(p, "a0a5", &q) != XQ_STATUS_ILLEGAL_MOVE) return 5;
    char *msg = xq_last_error_message();
    if (msg == NULL) return 6;
    xq_string_free(msg);
    if (xq_classify_situation(-800, 100, 800) != XQ_LABEL5_CLEAR_ADV_BLACK) return 7;
    xq_position_free(p);
    printf("ok\n");
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

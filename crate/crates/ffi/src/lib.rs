//! C ABI for the Xiangqi toolkit.
//!
//! Positions and scored move sets are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns an
//! [`XqStatus`]; after a failure `xq_last_error_message` describes it.
//! Strings handed out by the library are NUL-terminated UTF-8 and must be
//! released with [`xq_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use xiangqi_core::board::{Color, Position};
use xiangqi_core::dataset::{classify_situation, SituationLabel3, SituationLabel5};
use xiangqi_core::engine::{MaterialOracle, Oracle, ScoredMoveSet};
use xiangqi_core::movegen::{game_status, is_legal, legal_moves, perft, GameStatus};
use xiangqi_core::notation::{move_to_cff, move_to_iccs, parse_cff, parse_fen, parse_iccs, to_fen};
use xiangqi_core::reward::{
    group_relative_advantage, parse_response, reward_move, total_reward, Granularity, ResponseFormat, RewardConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    IllegalMove = 4,
    InvalidArgument = 5,
    EngineError = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XqGameState {
    Ongoing = 0,
    Checkmate = 1,
    Stalemate = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XqColor {
    Red = 0,
    Black = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XqGameStatus {
    pub state: XqGameState,
    /// Meaningful unless `state` is `Ongoing`.
    pub loser: XqColor,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XqLabel5 {
    ClearAdvBlack = 0,
    SlightAdvBlack = 1,
    Balanced = 2,
    SlightAdvRed = 3,
    ClearAdvRed = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XqLabel3 {
    AdvBlack = 0,
    Balanced = 1,
    AdvRed = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XqResponseFormat {
    Tagged = 0,
    Labeled = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct XqMoveReward {
    pub r_legal: u8,
    pub r_good: u8,
    pub r_best: u8,
    pub r_move: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct XqRewardBreakdown {
    pub r_legal: u8,
    pub r_good: u8,
    pub r_best: u8,
    pub r_move: u8,
    pub r_analysis: u8,
    pub r_format: u8,
    pub total: u8,
}

/// Opaque position handle.
pub struct XqPosition(Position);

/// Opaque scored move set handle.
pub struct XqScoredSet(ScoredMoveSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Fail(XqStatus, String);

type R<T> = Result<T, Fail>;

fn guard(f: impl FnOnce() -> R<()>) -> XqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            XqStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            XqStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> R<&'a str> {
    if p.is_null() {
        return Err(Fail(XqStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(XqStatus::InvalidUtf8, e.to_string()))
}

unsafe fn reference<'a, T>(p: *const T) -> R<&'a T> {
    p.as_ref().ok_or_else(|| Fail(XqStatus::NullPointer, "null handle".into()))
}

unsafe fn write<T>(out: *mut T, value: T) -> R<()> {
    if out.is_null() {
        return Err(Fail(XqStatus::NullPointer, "null output pointer".into()));
    }
    out.write(value);
    Ok(())
}

fn owned(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn parse_move(position: &Position, token: &str) -> R<xiangqi_core::board::Move> {
    let mv = parse_iccs(token).map_err(|e| Fail(XqStatus::ParseError, e.to_string()))?;
    if !is_legal(position, mv) {
        return Err(Fail(XqStatus::IllegalMove, format!("{token} is not legal")));
    }
    Ok(mv)
}

fn label5_in(l: u32) -> R<SituationLabel5> {
    SituationLabel5::ALL
        .get(l as usize)
        .copied()
        .ok_or_else(|| Fail(XqStatus::InvalidArgument, format!("{l} is not an XqLabel5 value")))
}

fn label5_out(l: SituationLabel5) -> XqLabel5 {
    match l {
        SituationLabel5::ClearAdvBlack => XqLabel5::ClearAdvBlack,
        SituationLabel5::SlightAdvBlack => XqLabel5::SlightAdvBlack,
        SituationLabel5::Balanced => XqLabel5::Balanced,
        SituationLabel5::SlightAdvRed => XqLabel5::SlightAdvRed,
        SituationLabel5::ClearAdvRed => XqLabel5::ClearAdvRed,
    }
}

fn color_out(c: Color) -> XqColor {
    match c {
        Color::Red => XqColor::Red,
        Color::Black => XqColor::Black,
    }
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn xq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL. Free with
/// `xq_string_free`.
#[no_mangle]
pub extern "C" fn xq_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map(|s| s.clone().into_raw()).unwrap_or(ptr::null_mut()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The standard opening position.
#[no_mangle]
pub extern "C" fn xq_position_start() -> *mut XqPosition {
    Box::into_raw(Box::new(XqPosition(Position::start())))
}

/// # Safety
/// `fen` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_position_from_fen(fen: *const c_char, out: *mut *mut XqPosition) -> XqStatus {
    guard(|| {
        let p = parse_fen(text(fen)?).map_err(|e| Fail(XqStatus::ParseError, e.to_string()))?;
        write(out, Box::into_raw(Box::new(XqPosition(p))))
    })
}

/// # Safety
/// `position` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xq_position_free(position: *mut XqPosition) {
    if !position.is_null() {
        drop(Box::from_raw(position));
    }
}

/// # Safety
/// `position` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_position_to_fen(position: *const XqPosition, out: *mut *mut c_char) -> XqStatus {
    guard(|| write(out, owned(to_fen(&reference(position)?.0))))
}

/// Legal moves in ICCS, space separated, in move order.
///
/// # Safety
/// `position` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_position_legal_moves(position: *const XqPosition, out: *mut *mut c_char) -> XqStatus {
    guard(|| {
        let moves: Vec<String> = legal_moves(&reference(position)?.0).into_iter().map(move_to_iccs).collect();
        write(out, owned(moves.join(" ")))
    })
}

/// # Safety
/// `position` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_position_legal_move_count(position: *const XqPosition, out: *mut usize) -> XqStatus {
    guard(|| write(out, legal_moves(&reference(position)?.0).len()))
}

/// # Safety
/// `position` must be a live handle, `iccs` a NUL-terminated string, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn xq_position_is_legal(position: *const XqPosition, iccs: *const c_char, out: *mut bool) -> XqStatus {
    guard(|| {
        let p = &reference(position)?.0;
        let legal = parse_iccs(text(iccs)?).is_ok_and(|m| is_legal(p, m));
        write(out, legal)
    })
}

/// Plays a legal ICCS move and returns the new position as a fresh handle.
///
/// # Safety
/// `position` must be a live handle, `iccs` a NUL-terminated string, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn xq_position_apply_move(
    position: *const XqPosition,
    iccs: *const c_char,
    out: *mut *mut XqPosition,
) -> XqStatus {
    guard(|| {
        let p = &reference(position)?.0;
        let mv = parse_move(p, text(iccs)?)?;
        let next = p.apply_move(mv).map_err(|e| Fail(XqStatus::IllegalMove, e.to_string()))?;
        write(out, Box::into_raw(Box::new(XqPosition(next))))
    })
}

/// # Safety
/// `position` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_position_perft(position: *const XqPosition, depth: u32, out: *mut u64) -> XqStatus {
    guard(|| write(out, perft(&reference(position)?.0, depth)))
}

/// # Safety
/// `position` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_position_status(position: *const XqPosition, out: *mut XqGameStatus) -> XqStatus {
    guard(|| {
        let p = &reference(position)?.0;
        let status = match game_status(p) {
            GameStatus::Ongoing => XqGameStatus { state: XqGameState::Ongoing, loser: color_out(p.side_to_move()) },
            GameStatus::Checkmate(c) => XqGameStatus { state: XqGameState::Checkmate, loser: color_out(c) },
            GameStatus::Stalemate(c) => XqGameStatus { state: XqGameState::Stalemate, loser: color_out(c) },
        };
        write(out, status)
    })
}

/// # Safety
/// `position` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_position_side_to_move(position: *const XqPosition, out: *mut XqColor) -> XqStatus {
    guard(|| write(out, color_out(reference(position)?.0.side_to_move())))
}

/// # Safety
/// `position` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_position_piece_count(position: *const XqPosition, out: *mut usize) -> XqStatus {
    guard(|| write(out, reference(position)?.0.piece_count()))
}

/// Text grid, Red at the bottom; Chinese glyphs when `chinese` is true.
///
/// # Safety
/// `position` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_position_render(position: *const XqPosition, chinese: bool, out: *mut *mut c_char) -> XqStatus {
    guard(|| {
        let p = &reference(position)?.0;
        write(out, owned(if chinese { p.render_board_chinese() } else { p.render_boardstr() }))
    })
}

/// # Safety
/// `position` must be a live handle, `iccs` a NUL-terminated string, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn xq_move_to_cff(position: *const XqPosition, iccs: *const c_char, out: *mut *mut c_char) -> XqStatus {
    guard(|| {
        let p = &reference(position)?.0;
        let mv = parse_move(p, text(iccs)?)?;
        let cff = move_to_cff(p, mv).map_err(|e| Fail(XqStatus::IllegalMove, e.to_string()))?;
        write(out, owned(cff))
    })
}

/// # Safety
/// `position` must be a live handle, `cff` a NUL-terminated string, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn xq_move_from_cff(position: *const XqPosition, cff: *const c_char, out: *mut *mut c_char) -> XqStatus {
    guard(|| {
        let p = &reference(position)?.0;
        let mv = parse_cff(p, text(cff)?).map_err(|e| Fail(XqStatus::ParseError, e.to_string()))?;
        write(out, owned(move_to_iccs(mv)))
    })
}

#[no_mangle]
pub extern "C" fn xq_classify_situation(value: i32, sigma_s: i32, sigma_l: i32) -> XqLabel5 {
    label5_out(classify_situation(value, sigma_s, sigma_l))
}

/// `label` is an `XqLabel5` value.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_coarsen_label(label: u32, out: *mut XqLabel3) -> XqStatus {
    guard(|| {
        let l3 = match label5_in(label)?.coarsen() {
            SituationLabel3::AdvBlack => XqLabel3::AdvBlack,
            SituationLabel3::Balanced => XqLabel3::Balanced,
            SituationLabel3::AdvRed => XqLabel3::AdvRed,
        };
        write(out, l3)
    })
}

/// Parses one scored-set JSON record.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_scored_set_from_json(json: *const c_char, out: *mut *mut XqScoredSet) -> XqStatus {
    guard(|| {
        let set = ScoredMoveSet::from_json_line(text(json)?).map_err(|e| Fail(XqStatus::ParseError, e.to_string()))?;
        write(out, Box::into_raw(Box::new(XqScoredSet(set))))
    })
}

/// Scores every legal move with the built-in material evaluator.
///
/// # Safety
/// `position` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_scored_set_material(position: *const XqPosition, out: *mut *mut XqScoredSet) -> XqStatus {
    guard(|| {
        let set = MaterialOracle
            .score_all_moves(&reference(position)?.0)
            .map_err(|e| Fail(XqStatus::EngineError, e.to_string()))?;
        write(out, Box::into_raw(Box::new(XqScoredSet(set))))
    })
}

/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_scored_set_to_json(set: *const XqScoredSet, out: *mut *mut c_char) -> XqStatus {
    guard(|| write(out, owned(reference(set)?.0.to_json_line())))
}

/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xq_scored_set_best_value(set: *const XqScoredSet, out: *mut i32) -> XqStatus {
    guard(|| write(out, reference(set)?.0.best_value()))
}

/// # Safety
/// `set` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xq_scored_set_free(set: *mut XqScoredSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// `iccs` may be NULL for "no move".
///
/// # Safety
/// `set` must be a live handle, `iccs` NULL or a NUL-terminated string,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xq_reward_move(
    set: *const XqScoredSet,
    iccs: *const c_char,
    sigma_good: i32,
    out: *mut XqMoveReward,
) -> XqStatus {
    guard(|| {
        let set = &reference(set)?.0;
        let mv = if iccs.is_null() { None } else { parse_iccs(text(iccs)?).ok() };
        let r = reward_move(set, mv, sigma_good);
        write(out, XqMoveReward { r_legal: r.r_legal, r_good: r.r_good, r_best: r.r_best, r_move: r.r_move })
    })
}

/// Full reward of a raw response. `format` is an `XqResponseFormat` value,
/// `truth` an `XqLabel5` value and `granularity` 3 or 5.
///
/// # Safety
/// `set` must be a live handle, `response` a NUL-terminated string, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn xq_total_reward(
    set: *const XqScoredSet,
    response: *const c_char,
    format: u32,
    truth: u32,
    sigma_good: i32,
    granularity: u32,
    out: *mut XqRewardBreakdown,
) -> XqStatus {
    guard(|| {
        let set = &reference(set)?.0;
        let granularity = match granularity {
            3 => Granularity::Three,
            5 => Granularity::Five,
            g => return Err(Fail(XqStatus::InvalidArgument, format!("granularity must be 3 or 5, got {g}"))),
        };
        let format = match format {
            f if f == XqResponseFormat::Tagged as u32 => ResponseFormat::Tagged,
            f if f == XqResponseFormat::Labeled as u32 => ResponseFormat::Labeled,
            f => return Err(Fail(XqStatus::InvalidArgument, format!("{f} is not an XqResponseFormat value"))),
        };
        let truth = label5_in(truth)?;
        let parsed = parse_response(text(response)?, format);
        let r = total_reward(&parsed, set, truth, &RewardConfig { sigma_good, granularity });
        write(
            out,
            XqRewardBreakdown {
                r_legal: r.r_legal,
                r_good: r.r_good,
                r_best: r.r_best,
                r_move: r.r_move,
                r_analysis: r.r_analysis,
                r_format: r.r_format,
                total: r.total,
            },
        )
    })
}

/// Writes `n` advantages to `out`; needs `n >= 2`.
///
/// # Safety
/// `rewards` must point to `n` readable doubles and `out` to `n` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn xq_group_relative_advantage(rewards: *const f64, n: usize, out: *mut f64) -> XqStatus {
    guard(|| {
        if rewards.is_null() || out.is_null() {
            return Err(Fail(XqStatus::NullPointer, "null array".into()));
        }
        let input = std::slice::from_raw_parts(rewards, n);
        let adv = group_relative_advantage(input).map_err(|e| Fail(XqStatus::InvalidArgument, e.to_string()))?;
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&adv);
        Ok(())
    })
}

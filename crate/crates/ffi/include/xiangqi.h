#ifndef XIANGQI_H
#define XIANGQI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum XqStatus {
  XQ_STATUS_OK = 0,
  XQ_STATUS_NULL_POINTER = 1,
  XQ_STATUS_INVALID_UTF8 = 2,
  XQ_STATUS_PARSE_ERROR = 3,
  XQ_STATUS_ILLEGAL_MOVE = 4,
  XQ_STATUS_INVALID_ARGUMENT = 5,
  XQ_STATUS_ENGINE_ERROR = 6,
  XQ_STATUS_PANIC = 7,
} XqStatus;

typedef enum XqGameState {
  XQ_GAME_STATE_ONGOING = 0,
  XQ_GAME_STATE_CHECKMATE = 1,
  XQ_GAME_STATE_STALEMATE = 2,
} XqGameState;

typedef enum XqColor {
  XQ_COLOR_RED = 0,
  XQ_COLOR_BLACK = 1,
} XqColor;

typedef enum XqLabel5 {
  XQ_LABEL5_CLEAR_ADV_BLACK = 0,
  XQ_LABEL5_SLIGHT_ADV_BLACK = 1,
  XQ_LABEL5_BALANCED = 2,
  XQ_LABEL5_SLIGHT_ADV_RED = 3,
  XQ_LABEL5_CLEAR_ADV_RED = 4,
} XqLabel5;

typedef enum XqLabel3 {
  XQ_LABEL3_ADV_BLACK = 0,
  XQ_LABEL3_BALANCED = 1,
  XQ_LABEL3_ADV_RED = 2,
} XqLabel3;

typedef enum XqResponseFormat {
  XQ_RESPONSE_FORMAT_TAGGED = 0,
  XQ_RESPONSE_FORMAT_LABELED = 1,
} XqResponseFormat;

// Opaque position handle.
typedef struct XqPosition XqPosition;

// Opaque scored move set handle.
typedef struct XqScoredSet XqScoredSet;

typedef struct XqGameStatus {
  enum XqGameState state;
  // Meaningful unless `state` is `Ongoing`.
  enum XqColor loser;
} XqGameStatus;

typedef struct XqMoveReward {
  uint8_t r_legal;
  uint8_t r_good;
  uint8_t r_best;
  uint8_t r_move;
} XqMoveReward;

typedef struct XqRewardBreakdown {
  uint8_t r_legal;
  uint8_t r_good;
  uint8_t r_best;
  uint8_t r_move;
  uint8_t r_analysis;
  uint8_t r_format;
  uint8_t total;
} XqRewardBreakdown;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static string.
const char *xq_version(void);

// Message for the most recent failure on this thread, or NULL. Free with
// `xq_string_free`.
char *xq_last_error_message(void);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void xq_string_free(char *s);

// The standard opening position.
struct XqPosition *xq_position_start(void);

// # Safety
// `fen` must be a NUL-terminated string; `out` must be writable.
enum XqStatus xq_position_from_fen(const char *fen, struct XqPosition **out);

// # Safety
// `position` must be NULL or a handle from this library, not yet freed.
void xq_position_free(struct XqPosition *position);

// # Safety
// `position` must be a live handle; `out` must be writable.
enum XqStatus xq_position_to_fen(const struct XqPosition *position, char **out);

// Legal moves in ICCS, space separated, in move order.
//
// # Safety
// `position` must be a live handle; `out` must be writable.
enum XqStatus xq_position_legal_moves(const struct XqPosition *position, char **out);

// # Safety
// `position` must be a live handle; `out` must be writable.
enum XqStatus xq_position_legal_move_count(const struct XqPosition *position, size_t *out);

// # Safety
// `position` must be a live handle, `iccs` a NUL-terminated string, `out`
// writable.
enum XqStatus xq_position_is_legal(const struct XqPosition *position, const char *iccs, bool *out);

// Plays a legal ICCS move and returns the new position as a fresh handle.
//
// # Safety
// `position` must be a live handle, `iccs` a NUL-terminated string, `out`
// writable.
enum XqStatus xq_position_apply_move(const struct XqPosition *position,
                                     const char *iccs,
                                     struct XqPosition **out);

// # Safety
// `position` must be a live handle; `out` must be writable.
enum XqStatus xq_position_perft(const struct XqPosition *position, uint32_t depth, uint64_t *out);

// # Safety
// `position` must be a live handle; `out` must be writable.
enum XqStatus xq_position_status(const struct XqPosition *position, struct XqGameStatus *out);

// # Safety
// `position` must be a live handle; `out` must be writable.
enum XqStatus xq_position_side_to_move(const struct XqPosition *position, enum XqColor *out);

// # Safety
// `position` must be a live handle; `out` must be writable.
enum XqStatus xq_position_piece_count(const struct XqPosition *position, size_t *out);

// Text grid, Red at the bottom; Chinese glyphs when `chinese` is true.
//
// # Safety
// `position` must be a live handle; `out` must be writable.
enum XqStatus xq_position_render(const struct XqPosition *position, bool chinese, char **out);

// # Safety
// `position` must be a live handle, `iccs` a NUL-terminated string, `out`
// writable.
enum XqStatus xq_move_to_cff(const struct XqPosition *position, const char *iccs, char **out);

// # Safety
// `position` must be a live handle, `cff` a NUL-terminated string, `out`
// writable.
enum XqStatus xq_move_from_cff(const struct XqPosition *position, const char *cff, char **out);

enum XqLabel5 xq_classify_situation(int32_t value, int32_t sigma_s, int32_t sigma_l);

// `label` is an `XqLabel5` value.
//
// # Safety
// `out` must be writable.
enum XqStatus xq_coarsen_label(uint32_t label, enum XqLabel3 *out);

// Parses one scored-set JSON record.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum XqStatus xq_scored_set_from_json(const char *json, struct XqScoredSet **out);

// Scores every legal move with the built-in material evaluator.
//
// # Safety
// `position` must be a live handle; `out` must be writable.
enum XqStatus xq_scored_set_material(const struct XqPosition *position, struct XqScoredSet **out);

// # Safety
// `set` must be a live handle; `out` must be writable.
enum XqStatus xq_scored_set_to_json(const struct XqScoredSet *set, char **out);

// # Safety
// `set` must be a live handle; `out` must be writable.
enum XqStatus xq_scored_set_best_value(const struct XqScoredSet *set, int32_t *out);

// # Safety
// `set` must be NULL or a handle from this library, not yet freed.
void xq_scored_set_free(struct XqScoredSet *set);

// `iccs` may be NULL for "no move".
//
// # Safety
// `set` must be a live handle, `iccs` NULL or a NUL-terminated string,
// `out` writable.
enum XqStatus xq_reward_move(const struct XqScoredSet *set,
                             const char *iccs,
                             int32_t sigma_good,
                             struct XqMoveReward *out);

// Full reward of a raw response. `format` is an `XqResponseFormat` value,
// `truth` an `XqLabel5` value and `granularity` 3 or 5.
//
// # Safety
// `set` must be a live handle, `response` a NUL-terminated string, `out`
// writable.
enum XqStatus xq_total_reward(const struct XqScoredSet *set,
                              const char *response,
                              uint32_t format,
                              uint32_t truth,
                              int32_t sigma_good,
                              uint32_t granularity,
                              struct XqRewardBreakdown *out);

// Writes `n` advantages to `out`; needs `n >= 2`.
//
// # Safety
// `rewards` must point to `n` readable doubles and `out` to `n` writable
// doubles.
enum XqStatus xq_group_relative_advantage(const double *rewards, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XIANGQI_H */

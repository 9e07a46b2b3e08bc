#ifndef LIPONE_H
#define LIPONE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible entry point.
 */
typedef enum {
  LIPONE_STATUS_OK = 0,
  LIPONE_STATUS_NULL_POINTER = 1,
  LIPONE_STATUS_INVALID_UTF8 = 2,
  LIPONE_STATUS_PARSE = 3,
  LIPONE_STATUS_INVALID_INPUT = 4,
  LIPONE_STATUS_BUDGET_EXCEEDED = 5,
  LIPONE_STATUS_TOO_LARGE = 6,
  LIPONE_STATUS_PANIC = 7,
} LiponeStatus;

/**
 * Outcome of a certified density check.
 */
typedef enum {
  LIPONE_VERDICT_PASS = 0,
  LIPONE_VERDICT_FAIL = 1,
  LIPONE_VERDICT_INCONCLUSIVE = 2,
} LiponeVerdict;

/**
 * Multi-generation Cantor-type stage on `[0, 1]`.
 */
typedef struct LiponeCantorStage LiponeCantorStage;

/**
 * The function built from a nested chain.
 */
typedef struct LiponeFunction LiponeFunction;

/**
 * Canonical interval set.
 */
typedef struct LiponeSet LiponeSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. Owned by the
 * library and valid until the next call on the same thread.
 */
const char *lipone_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void lipone_string_free(char *s);

/**
 * Parses a set from JSON (`{"parts": [...]}`).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
LiponeStatus lipone_set_from_json(const char *json, LiponeSet **out);

/**
 * # Safety
 * `set` must come from this library and not have been freed. Null is ignored.
 */
void lipone_set_free(LiponeSet *set);

/**
 * Canonical JSON form of the set.
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
LiponeStatus lipone_set_to_json(const LiponeSet *set, char **out);

/**
 * Lebesgue measure: `"p/q"` or `"+inf"`.
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
LiponeStatus lipone_set_measure(const LiponeSet *set, char **out);

/**
 * # Safety
 * `set` must be a live handle; `x` a NUL-terminated rational; `out` writable.
 */
LiponeStatus lipone_set_contains(const LiponeSet *set, const char *x, bool *out);

/**
 * Certifies `max(left, right) density >= threshold` at `x` for every radius in
 * `[r_min, r_max]`, using at most `max_evaluations` window measures.
 *
 * # Safety
 * `set` must be a live handle; string arguments NUL-terminated; `out` writable.
 */
LiponeStatus lipone_set_certify_density(const LiponeSet *set,
                                        const char *x,
                                        const char *r_min,
                                        const char *r_max,
                                        const char *threshold,
                                        size_t max_evaluations,
                                        LiponeVerdict *out);

/**
 * Validates a chain (`{"stages": [set, ...]}`) and builds its function.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
LiponeStatus lipone_function_from_chain_json(const char *json, LiponeFunction **out);

/**
 * # Safety
 * `f` must come from this library and not have been freed. Null is ignored.
 */
void lipone_function_free(LiponeFunction *f);

/**
 * Number of stages `N` in the chain.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
LiponeStatus lipone_function_stage_count(const LiponeFunction *f, uint32_t *out);

/**
 * Exact value `f(x)`.
 *
 * # Safety
 * `f` must be a live handle; `x` a NUL-terminated rational; `out` writable.
 */
LiponeStatus lipone_function_eval(const LiponeFunction *f, const char *x, char **out);

/**
 * Exact value of the single term `f_level(x)`, `level >= 1`.
 *
 * # Safety
 * `f` must be a live handle; `x` a NUL-terminated rational; `out` writable.
 */
LiponeStatus lipone_function_eval_level(const LiponeFunction *f,
                                        uint32_t level,
                                        const char *x,
                                        char **out);

/**
 * Enclosures of lip f and Lip f at `x` over the radii `r_max, r_max·ratio, …`
 * down to `r_min`, as a JSON object.
 *
 * # Safety
 * `f` must be a live handle; string arguments NUL-terminated; `out` writable.
 */
LiponeStatus lipone_function_lip_scan(const LiponeFunction *f,
                                      const char *x,
                                      const char *r_min,
                                      const char *r_max,
                                      const char *ratio,
                                      uint32_t refinement,
                                      char **out);

/**
 * Measure of the level-`k` open set in `[0, 1]`.
 *
 * # Safety
 * `out` must be writable.
 */
LiponeStatus lipone_cantor_level_measure(uint32_t k, char **out);

/**
 * Builds the stage on `[0, 1]` removing levels `levels[0..count]` generation by
 * generation; the removed measure must stay within `budget`.
 *
 * # Safety
 * `levels` must point to `count` readable values; `budget` a NUL-terminated
 * rational; `out` writable.
 */
LiponeStatus lipone_cantor_stage_new(const uint32_t *levels,
                                     size_t count,
                                     const char *budget,
                                     LiponeCantorStage **out);

/**
 * # Safety
 * `stage` must come from this library and not have been freed. Null is ignored.
 */
void lipone_cantor_stage_free(LiponeCantorStage *stage);

/**
 * Measure of the surviving closed set.
 *
 * # Safety
 * `stage` must be a live handle; `out` must be writable.
 */
LiponeStatus lipone_cantor_stage_complement_measure(const LiponeCantorStage *stage, char **out);

/**
 * Whether `x` lies in the closed set the stage keeps.
 *
 * # Safety
 * `stage` must be a live handle; `x` a NUL-terminated rational; `out` writable.
 */
LiponeStatus lipone_cantor_stage_contains(const LiponeCantorStage *stage, const char *x, bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIPONE_H */

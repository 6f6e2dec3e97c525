#ifndef ACEP_H
#define ACEP_H

/* This file is generated by cbindgen from the acep-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes reported alongside failures.
 */
typedef enum AcepStatus {
  ACEP_STATUS_OK = 0,
  ACEP_STATUS_NULL_ARGUMENT = 1,
  ACEP_STATUS_INVALID_UTF8 = 2,
  ACEP_STATUS_INVALID_INPUT = 3,
  ACEP_STATUS_PANIC = 4,
} AcepStatus;

/**
 * Opaque handle to a parsed subgroup: the alphabet and its folded graph.
 */
typedef struct AcepSubgroup AcepSubgroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread; empty when none.
 * The pointer stays valid until the next failing call on the thread.
 */
const char *acep_last_error(void);

/**
 * Status code of the most recent failure on this thread.
 */
enum AcepStatus acep_last_status(void);

/**
 * Library version as a static string.
 */
const char *acep_version(void);

/**
 * Parses a subgroup spec (JSON) and folds its Stallings graph. Returns
 * null on error; see `acep_last_error`.
 *
 * # Safety
 *
 * `spec_json` must be a valid NUL-terminated C string or null.
 */
struct AcepSubgroup *acep_subgroup_new(const char *spec_json);

/**
 * Frees a handle returned by `acep_subgroup_new`. Null is ignored.
 *
 * # Safety
 *
 * `handle` must be null or a pointer previously returned by
 * `acep_subgroup_new` that has not been freed.
 */
void acep_subgroup_free(struct AcepSubgroup *handle);

/**
 * Number of vertices of the folded graph; -1 on null.
 *
 * # Safety
 *
 * `handle` must be null or a live handle.
 */
int64_t acep_subgroup_vertices(const struct AcepSubgroup *handle);

/**
 * Number of edges of the folded graph; -1 on null.
 *
 * # Safety
 *
 * `handle` must be null or a live handle.
 */
int64_t acep_subgroup_edges(const struct AcepSubgroup *handle);

/**
 * Rank of the subgroup; -1 on null.
 *
 * # Safety
 *
 * `handle` must be null or a live handle.
 */
int64_t acep_subgroup_rank(const struct AcepSubgroup *handle);

/**
 * Membership of a word (text syntax: lowercase letters, uppercase
 * inverses). Returns 1 or 0, and -1 on error.
 *
 * # Safety
 *
 * `handle` must be null or a live handle; `word` a C string or null.
 */
int32_t acep_subgroup_member(const struct AcepSubgroup *handle, const char *word);

/**
 * The four-case classification: 1 malnormal, 2 large intersection,
 * 3 non-power cyclic intersection, 4 cyclonormal with power
 * intersections. Returns 0 on error.
 *
 * # Safety
 *
 * `handle` must be null or a live handle.
 */
int32_t acep_classify_case(const struct AcepSubgroup *handle);

/**
 * Runs the full analysis pipeline and returns the JSON report as a
 * library-owned string; free with `acep_string_free`. `s_bound` of 0
 * selects the default bound. Null on error.
 *
 * # Safety
 *
 * `handle` must be null or a live handle.
 */
char *acep_analyze_json(const struct AcepSubgroup *handle, uintptr_t s_bound, bool skip_metric);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 *
 * `text` must be null or a pointer returned by an acep function that has
 * not been freed.
 */
void acep_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACEP_H */

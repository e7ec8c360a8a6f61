#ifndef PAGEDEX_H
#define PAGEDEX_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PdxStatus {
  PDX_STATUS_OK = 0,
  PDX_STATUS_NULL_ARGUMENT = 1,
  PDX_STATUS_INVALID_UTF8 = 2,
  PDX_STATUS_INVALID_TAILORING = 3,
  PDX_STATUS_PARSE_ERROR = 4,
  PDX_STATUS_PAGE_OUT_OF_RANGE = 5,
  PDX_STATUS_SORT_VIOLATION = 6,
  PDX_STATUS_INVALID_INDEX = 7,
  PDX_STATUS_INVALID_LOCATION = 8,
  PDX_STATUS_INVALID_ARGUMENT = 9,
  PDX_STATUS_BUFFER_TOO_SMALL = 10,
  PDX_STATUS_UNKNOWN_LANGUAGE = 11,
  PDX_STATUS_PANIC = 99,
} PdxStatus;

typedef enum PdxVariant {
  PDX_VARIANT_FIRST_WORD = 0,
  PDX_VARIANT_LAST_WORD = 1,
} PdxVariant;

typedef enum PdxExists {
  PDX_EXISTS_NO = 0,
  PDX_EXISTS_YES = 1,
  PDX_EXISTS_MAYBE = 2,
} PdxExists;

typedef enum PdxAggregation {
  PDX_AGGREGATION_LAST_WINS = 0,
  PDX_AGGREGATION_LINEAR_MEAN = 1,
  PDX_AGGREGATION_QUADRATIC_MEAN = 2,
} PdxAggregation;

typedef struct PdxCollator PdxCollator;

typedef struct PdxFullIndex PdxFullIndex;

typedef struct PdxSparseIndex PdxSparseIndex;

/**
 * Result of a sparse lookup: the inclusive page range to show.
 */
typedef struct PdxSparseHit {
  uint32_t first_page;
  uint32_t last_page;
  enum PdxExists exists;
} PdxSparseHit;

typedef struct PdxPoint {
  uint32_t x;
  uint32_t y;
} PdxPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Free it with
 * [`pdx_string_free`].
 */
char *pdx_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void pdx_string_free(char *s);

/**
 * Compiles a collator from tailoring rule text. A null `rules` gives
 * code-point order.
 *
 * # Safety
 * `rules` must be null or NUL-terminated; `out` must be writable.
 */
enum PdxStatus pdx_collator_new(const char *rules, struct PdxCollator **out);

/**
 * Collator for a shipped tailoring such as `"en"` or `"ur"`.
 *
 * # Safety
 * `code` must be NUL-terminated; `out` must be writable.
 */
enum PdxStatus pdx_collator_builtin(const char *code, struct PdxCollator **out);

/**
 * # Safety
 * `c` must be null or a live collator handle.
 */
void pdx_collator_free(struct PdxCollator *c);

/**
 * Writes -1, 0 or 1 to `out` as `a` sorts before, equal to or after `b`.
 *
 * # Safety
 * All pointers must be valid; strings NUL-terminated.
 */
enum PdxStatus pdx_collator_compare(const struct PdxCollator *c,
                                    const char *a,
                                    const char *b,
                                    int32_t *out);

/**
 * Builds a sparse index from `word<TAB>page` lines.
 *
 * # Safety
 * `c` must be a live collator, `tsv` NUL-terminated, `out` writable.
 */
enum PdxStatus pdx_sparse_from_tsv(const struct PdxCollator *c,
                                   const char *tsv,
                                   uint32_t page_count,
                                   enum PdxVariant variant,
                                   struct PdxSparseIndex **out);

/**
 * # Safety
 * `idx` must be null or a live sparse index handle.
 */
void pdx_sparse_free(struct PdxSparseIndex *idx);

/**
 * # Safety
 * `idx` must be live, `word` NUL-terminated, `out` writable.
 */
enum PdxStatus pdx_sparse_lookup(const struct PdxSparseIndex *idx,
                                 const char *word,
                                 struct PdxSparseHit *out);

/**
 * Builds a full index from `word<TAB>page[,page...]` lines.
 *
 * # Safety
 * `c` must be a live collator, `tsv` NUL-terminated, `out` writable.
 */
enum PdxStatus pdx_full_from_tsv(const struct PdxCollator *c,
                                 const char *tsv,
                                 uint32_t page_count,
                                 struct PdxFullIndex **out);

/**
 * # Safety
 * `idx` must be null or a live full index handle.
 */
void pdx_full_free(struct PdxFullIndex *idx);

/**
 * Writes the ascending pages holding `word` into `pages` and their number
 * into `out_len`. When `capacity` is too small nothing is copied,
 * `out_len` still receives the needed length and the call returns
 * `BufferTooSmall`. `exists` may be null.
 *
 * # Safety
 * `idx` must be live, `word` NUL-terminated, `pages` valid for `capacity`
 * writes (may be null when `capacity` is 0), `out_len` writable.
 */
enum PdxStatus pdx_full_lookup(const struct PdxFullIndex *idx,
                               const char *word,
                               uint32_t *pages,
                               size_t capacity,
                               size_t *out_len,
                               enum PdxExists *exists);

/**
 * Prefix bucket statistics of a newline-separated wordlist as TSV, one row
 * per entry of `sizes`. Free the result with [`pdx_string_free`].
 *
 * # Safety
 * `c` must be live, `wordlist` NUL-terminated, `sizes` valid for
 * `n_sizes` reads, `out` writable.
 */
enum PdxStatus pdx_prefix_stats_tsv(const struct PdxCollator *c,
                                    const char *wordlist,
                                    const size_t *sizes,
                                    size_t n_sizes,
                                    char **out);

/**
 * Aggregates marker proposals for one word. Proposals are taken in
 * submission order, so `LastWins` picks the final element.
 *
 * # Safety
 * `points` must be valid for `n` reads and `out` writable.
 */
enum PdxStatus pdx_aggregate_marker(const struct PdxPoint *points,
                                    size_t n,
                                    enum PdxAggregation policy,
                                    struct PdxPoint *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAGEDEX_H */

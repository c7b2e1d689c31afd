#ifndef MEMBERSHIP_RD_H
#define MEMBERSHIP_RD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Error metric selector for [`mrd_solve_rp`].
 */
typedef enum {
  MRD_METRIC_FNR = 0,
  MRD_METRIC_FPR = 1,
  MRD_METRIC_LOG_LOSS_KEY = 2,
  MRD_METRIC_LOG_LOSS_NON_KEY = 3,
} MrdMetric;

/**
 * Result code of every call.
 */
typedef enum {
  MRD_STATUS_OK = 0,
  MRD_STATUS_NULL_POINTER = 1,
  MRD_STATUS_INVALID_ARGUMENT = 2,
  MRD_STATUS_TRIVIAL_REGIME = 3,
  MRD_STATUS_REGIME_VIOLATION = 4,
  MRD_STATUS_INFEASIBLE = 5,
  MRD_STATUS_NOT_RECIPROCAL_PRIME = 6,
  MRD_STATUS_DUPLICATE_KEY = 7,
  MRD_STATUS_SEARCH_EXHAUSTED = 8,
  MRD_STATUS_BAD_FORMAT = 9,
  MRD_STATUS_BUFFER_TOO_SMALL = 10,
  MRD_STATUS_PANIC = 11,
} MrdStatus;

/**
 * Opaque built filter.
 */
typedef struct MrdFilter MrdFilter;

typedef struct {
  double x_star;
  double q_star;
  /**
   * Bits per key.
   */
  double rate;
} MrdLogLossOptimum;

typedef struct {
  double p;
  double eps_k;
  double eps_n;
  /**
   * Bits per key.
   */
  double rate;
  double dual_k;
  double dual_n;
  bool converged;
} MrdFrontierPoint;

typedef struct {
  uint64_t satisfied_keys;
  uint64_t candidates_tried;
  uint64_t bits_payload;
  bool success;
} MrdBuildReport;

typedef struct {
  uint64_t n;
  uint64_t q;
  uint64_t m;
  double eps_k;
  double eps_n;
  uint64_t seed;
} MrdFilterParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated, into
 * `buf` (truncated to `len` bytes). Returns the full message length plus one.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t mrd_last_error_message(char *buf, size_t len);

/**
 * Rate in bits per key of the binary-metric optimum.
 *
 * # Safety
 * `out_rate` must be valid for writes.
 */
MrdStatus mrd_optimal_binary(double eps_k, double eps_n, double *out_rate);

/**
 * Log-loss optimum; budgets in nats.
 *
 * # Safety
 * `out` must be valid for writes.
 */
MrdStatus mrd_optimal_logloss(double eps_k, double eps_n, MrdLogLossOptimum *out);

/**
 * # Safety
 * `out_rate` must be valid for writes.
 */
MrdStatus mrd_first_order_rate(double eps_k, double eps_n, double p, double *out_rate);

/**
 * Total-bit lower bound for `n` keys at `fp_value` bits per key.
 *
 * # Safety
 * `out_bits` must be valid for writes.
 */
MrdStatus mrd_memory_lower_bound(uint64_t n, double fp_value, double *out_bits);

/**
 * Solves `R_p` with the default solver settings.
 *
 * # Safety
 * `out` must be valid for writes.
 */
MrdStatus mrd_solve_rp(double p,
                       MrdMetric metric_k,
                       MrdMetric metric_n,
                       double eps_k,
                       double eps_n,
                       MrdFrontierPoint *out);

/**
 * Builds a filter over `n` keys; key `i` is `keys[i][..key_lens[i]]`.
 *
 * On success `*out_filter` owns a new handle. `out_report` may be null; when
 * given it is filled on success and on [`MrdStatus::SearchExhausted`].
 *
 * # Safety
 * `keys` and `key_lens` must hold `n` entries and each key pointer must be
 * valid for its length (or null with length 0). `out_filter` must be valid
 * for writes.
 */
MrdStatus mrd_filter_build(const uint8_t *const *keys,
                           const size_t *key_lens,
                           size_t n,
                           double eps_k,
                           double eps_n,
                           uint64_t seed,
                           MrdFilter **out_filter,
                           MrdBuildReport *out_report);

/**
 * Writes 1 to `*out_accept` if the filter accepts the element, else 0.
 *
 * # Safety
 * `filter` must be a live handle, `elem` valid for `len` bytes (or null with
 * `len` 0), `out_accept` valid for writes.
 */
MrdStatus mrd_filter_query(const MrdFilter *filter,
                           const uint8_t *elem,
                           size_t len,
                           uint8_t *out_accept);

/**
 * # Safety
 * `filter` must be a live handle and `out` valid for writes.
 */
MrdStatus mrd_filter_params(const MrdFilter *filter, MrdFilterParams *out);

/**
 * Serializes into `buf`. `*out_len` always receives the required size; with
 * a null or short buffer the call returns [`MrdStatus::BufferTooSmall`].
 *
 * # Safety
 * `filter` must be a live handle, `buf` null or valid for `cap` bytes,
 * `out_len` valid for writes.
 */
MrdStatus mrd_filter_serialize(const MrdFilter *filter, uint8_t *buf, size_t cap, size_t *out_len);

/**
 * # Safety
 * `bytes` must be valid for `len` bytes and `out_filter` valid for writes.
 */
MrdStatus mrd_filter_deserialize(const uint8_t *bytes, size_t len, MrdFilter **out_filter);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `filter` must be null or a handle not yet freed.
 */
void mrd_filter_free(MrdFilter *filter);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEMBERSHIP_RD_H */

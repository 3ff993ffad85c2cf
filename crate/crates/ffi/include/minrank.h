#ifndef MINRANK_H
#define MINRANK_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Rank minimization method.
 */
typedef enum MinrankVariant {
  MINRANK_VARIANT_AP_EIG = 0,
  MINRANK_VARIANT_AP_SVD = 1,
  MINRANK_VARIANT_DIRAP_EIG = 2,
  MINRANK_VARIANT_DIRAP_SVD = 3,
  MINRANK_VARIANT_ALT_MIN = 4,
} MinrankVariant;

/**
 * Status returned by every fallible call.
 */
typedef enum MinrankStatus {
  MINRANK_STATUS_OK = 0,
  MINRANK_STATUS_NULL_POINTER = 1,
  MINRANK_STATUS_INVALID_ARGUMENT = 2,
  MINRANK_STATUS_PARSE = 3,
  MINRANK_STATUS_NUMERICAL = 4,
  MINRANK_STATUS_DECODING = 5,
  MINRANK_STATUS_PANIC = 6,
} MinrankStatus;

/**
 * Linear index code built from an outcome.
 */
typedef struct MinrankCode MinrankCode;

/**
 * Side information graph.
 */
typedef struct MinrankGraph MinrankGraph;

/**
 * Result of a rank minimization run.
 */
typedef struct MinrankOutcome MinrankOutcome;

/**
 * Solver settings. Obtain defaults from [`minrank_config_default`].
 */
typedef struct MinrankConfig {
  enum MinrankVariant variant;
  double epsilon;
  size_t max_iters;
  size_t restarts;
  uint64_t seed;
} MinrankConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *minrank_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *minrank_version(void);

/**
 * Default solver settings.
 */
struct MinrankConfig minrank_config_default(void);

/**
 * Creates a graph on `n` vertices with no edges.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum MinrankStatus minrank_graph_new(size_t n, bool directed, struct MinrankGraph **out);

/**
 * Parses a graph in the text format written by the command-line tool.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum MinrankStatus minrank_graph_parse(const char *text, struct MinrankGraph **out);

/**
 * Adds edge `(i, j)` (0-based): user `i` caches message `j`. On an undirected graph
 * the reverse edge is added too.
 *
 * # Safety
 * `graph` must be a live handle.
 */
enum MinrankStatus minrank_graph_add_edge(struct MinrankGraph *graph, size_t i, size_t j);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t minrank_graph_size(const struct MinrankGraph *graph);

/**
 * Releases a graph. Null is ignored.
 *
 * # Safety
 * `graph` must be null or a handle not yet freed.
 */
void minrank_graph_free(struct MinrankGraph *graph);

/**
 * Greedy clique cover size of the graph's undirected part.
 *
 * # Safety
 * `graph` must be a live handle and `out` writable.
 */
enum MinrankStatus minrank_greedy_coloring(const struct MinrankGraph *graph, size_t *out);

/**
 * Runs the rank sweep on `graph`.
 *
 * # Safety
 * `graph` and `config` must be valid; `out` must be writable.
 */
enum MinrankStatus minrank_solve(const struct MinrankGraph *graph,
                                 const struct MinrankConfig *config,
                                 struct MinrankOutcome **out);

/**
 * Rank of the completion found, or 0 for a null handle.
 *
 * # Safety
 * `outcome` must be null or a live handle.
 */
size_t minrank_outcome_rank(const struct MinrankOutcome *outcome);

/**
 * Final gap between the completion and the pattern, or NaN for null.
 *
 * # Safety
 * `outcome` must be null or a live handle.
 */
double minrank_outcome_residual(const struct MinrankOutcome *outcome);

/**
 * Projection cycles over all attempts, or 0 for null.
 *
 * # Safety
 * `outcome` must be null or a live handle.
 */
size_t minrank_outcome_iterations(const struct MinrankOutcome *outcome);

/**
 * Copies the completed `n x n` matrix into `buf` in row-major order.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum MinrankStatus minrank_outcome_matrix(const struct MinrankOutcome *outcome,
                                          double *buf,
                                          size_t len);

/**
 * Releases an outcome. Null is ignored.
 *
 * # Safety
 * `outcome` must be null or a handle not yet freed.
 */
void minrank_outcome_free(struct MinrankOutcome *outcome);

/**
 * Builds an index code (encoder rows and decoders) from an outcome.
 *
 * # Safety
 * `outcome` must be a live handle and `out` writable.
 */
enum MinrankStatus minrank_code_new(const struct MinrankOutcome *outcome, struct MinrankCode **out);

/**
 * Number of broadcast symbols, or 0 for null.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
size_t minrank_code_length(const struct MinrankCode *code);

/**
 * Number of messages, or 0 for null.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
size_t minrank_code_messages(const struct MinrankCode *code);

/**
 * Encodes `n` messages into `len` broadcast symbols.
 *
 * # Safety
 * `x` must point to `n` doubles and `y` to `len` writable doubles.
 */
enum MinrankStatus minrank_encode(const struct MinrankCode *code,
                                  const double *x,
                                  size_t n,
                                  double *y,
                                  size_t len);

/**
 * Decodes the message wanted by `user` from the broadcast `y` and the
 * user's cache. `cache` holds `n` values; only entries of messages the
 * user caches are read.
 *
 * # Safety
 * `y` must point to `len` doubles, `cache` to `n` doubles, `out` writable.
 */
enum MinrankStatus minrank_decode(const struct MinrankCode *code,
                                  const double *y,
                                  size_t len,
                                  size_t user,
                                  const double *cache,
                                  size_t n,
                                  double *out);

/**
 * Releases a code. Null is ignored.
 *
 * # Safety
 * `code` must be null or a handle not yet freed.
 */
void minrank_code_free(struct MinrankCode *code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MINRANK_H */

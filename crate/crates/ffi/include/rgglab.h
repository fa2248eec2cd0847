#ifndef RGGLAB_H
#define RGGLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum RgglabStatus {
  RGGLAB_STATUS_OK = 0,
  RGGLAB_STATUS_INVALID_ARGUMENT = 1,
  RGGLAB_STATUS_NULL_POINTER = 2,
  RGGLAB_STATUS_CALIBRATION_FAILURE = 3,
  RGGLAB_STATUS_DISCONNECTED = 4,
  RGGLAB_STATUS_NOT_TWO_EDGE_CONNECTED = 5,
  RGGLAB_STATUS_INVALID_WALK = 6,
  RGGLAB_STATUS_SIZE_GUARD = 7,
  RGGLAB_STATUS_DOMAIN = 8,
  RGGLAB_STATUS_PARSE = 9,
  RGGLAB_STATUS_IO = 10,
  RGGLAB_STATUS_BUFFER_TOO_SMALL = 11,
  RGGLAB_STATUS_PANIC = 12,
} RgglabStatus;

/**
 * Simple undirected graph.
 */
typedef struct RgglabGraph RgglabGraph;

/**
 * Ascending eigenvalues of a symmetric matrix.
 */
typedef struct RgglabSpectrum RgglabSpectrum;

/**
 * Unit vectors on the sphere, one per vertex.
 */
typedef struct RgglabVectors RgglabVectors;

/**
 * Statistics of the graph traced out by a closed walk.
 */
typedef struct RgglabWalkStats {
  /**
   * Walk length, counting the closing step.
   */
  size_t k;
  size_t v;
  size_t e;
  /**
   * Excess `e - v + 1`.
   */
  size_t g;
  /**
   * Edges inside 2-edge-connected components.
   */
  size_t c;
  /**
   * Ears of length 2.
   */
  size_t t;
  /**
   * Edges traversed exactly once.
   */
  size_t b;
} RgglabWalkStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `capacity`, and returns the untruncated length in bytes
 * (without the NUL). An empty message means the last call succeeded.
 *
 * # Safety
 * `buf` must be null or point to `capacity` writable bytes.
 */
size_t rgglab_last_error_message(char *buf, size_t capacity);

/**
 * Threshold `tau` with `P(<u, e_1> >= tau) = p` on the sphere in `R^d`.
 *
 * # Safety
 * `tau` must be a valid pointer.
 */
enum RgglabStatus rgglab_calibrate_tau(double p, size_t d, double tol, double *tau);

/**
 * Normalized measure of the cap `{x : x_1 >= tau}` in `R^d`.
 *
 * # Safety
 * `prob` must be a valid pointer.
 */
enum RgglabStatus rgglab_cap_probability(double tau, size_t d, double *prob);

/**
 * Samples `n` uniform unit vectors in `R^d`.
 *
 * # Safety
 * `vectors` must be a valid pointer; the handle it receives is released
 * with [`rgglab_vectors_free`].
 */
enum RgglabStatus rgglab_vectors_sample(size_t n,
                                        size_t d,
                                        uint64_t seed,
                                        struct RgglabVectors **vectors);

/**
 * Number of vectors and their dimension.
 *
 * # Safety
 * `vectors` must be a live handle; `n` and `d` valid pointers.
 */
enum RgglabStatus rgglab_vectors_shape(const struct RgglabVectors *vectors, size_t *n, size_t *d);

/**
 * Copies vector `i` into `buf`.
 *
 * # Safety
 * `vectors` must be a live handle, `buf` must hold `capacity` doubles and
 * `len` must be a valid pointer.
 */
enum RgglabStatus rgglab_vectors_row(const struct RgglabVectors *vectors,
                                     size_t i,
                                     double *buf,
                                     size_t capacity,
                                     size_t *len);

/**
 * # Safety
 * `vectors` must be null or a handle not yet freed.
 */
void rgglab_vectors_free(struct RgglabVectors *vectors);

/**
 * Geometric graph on `vectors` with the threshold calibrated to `p`.
 *
 * # Safety
 * `vectors` must be a live handle and `graph` a valid pointer.
 */
enum RgglabStatus rgglab_graph_geometric(const struct RgglabVectors *vectors,
                                         double p,
                                         double tol,
                                         struct RgglabGraph **graph);

/**
 * Geometric graph on `vectors` with an explicit threshold `tau`.
 *
 * # Safety
 * `vectors` must be a live handle and `graph` a valid pointer.
 */
enum RgglabStatus rgglab_graph_geometric_tau(const struct RgglabVectors *vectors,
                                             double tau,
                                             struct RgglabGraph **graph);

/**
 * Erdős–Rényi graph `G(n, p)`.
 *
 * # Safety
 * `graph` must be a valid pointer.
 */
enum RgglabStatus rgglab_graph_erdos_renyi(size_t n,
                                           double p,
                                           uint64_t seed,
                                           struct RgglabGraph **graph);

/**
 * Graph on `n` vertices from `edge_count` pairs stored flat in `edges`
 * (`2 * edge_count` entries).
 *
 * # Safety
 * `edges` must hold `2 * edge_count` values and `graph` be a valid pointer.
 */
enum RgglabStatus rgglab_graph_from_edges(size_t n,
                                          const size_t *edges,
                                          size_t edge_count,
                                          struct RgglabGraph **graph);

/**
 * Vertex and edge counts.
 *
 * # Safety
 * `graph` must be a live handle; `n` and `edge_count` valid pointers.
 */
enum RgglabStatus rgglab_graph_size(const struct RgglabGraph *graph, size_t *n, size_t *edge_count);

/**
 * Edges as flat `(a, b)` pairs with `a < b`, sorted; `len` receives the
 * number of values (twice the edge count).
 *
 * # Safety
 * `graph` must be a live handle, `buf` must hold `capacity` values and
 * `len` must be a valid pointer.
 */
enum RgglabStatus rgglab_graph_edges(const struct RgglabGraph *graph,
                                     size_t *buf,
                                     size_t capacity,
                                     size_t *len);

/**
 * Bridges as flat sorted pairs, like [`rgglab_graph_edges`].
 *
 * # Safety
 * Same contract as [`rgglab_graph_edges`].
 */
enum RgglabStatus rgglab_graph_bridges(const struct RgglabGraph *graph,
                                       size_t *buf,
                                       size_t capacity,
                                       size_t *len);

/**
 * Sizes of the decomposition of a connected graph: number of
 * 2-edge-connected components, bridges, junction vertices, and ears over
 * all components.
 *
 * # Safety
 * `graph` must be a live handle and the outputs valid pointers.
 */
enum RgglabStatus rgglab_graph_decomposition_counts(const struct RgglabGraph *graph,
                                                    size_t *components,
                                                    size_t *bridges,
                                                    size_t *junctions,
                                                    size_t *ears);

/**
 * # Safety
 * `graph` must be null or a handle not yet freed.
 */
void rgglab_graph_free(struct RgglabGraph *graph);

/**
 * Eigenvalues of the adjacency matrix of `graph`, optionally centered as
 * `A - p (J - I)` when `center_p > 0`.
 *
 * # Safety
 * `graph` must be a live handle and `spectrum` a valid pointer.
 */
enum RgglabStatus rgglab_spectrum_of_graph(const struct RgglabGraph *graph,
                                           double center_p,
                                           struct RgglabSpectrum **spectrum);

/**
 * Eigenvalues of the `n x n` symmetric matrix stored row-major in `data`.
 *
 * # Safety
 * `data` must hold `n * n` doubles and `spectrum` be a valid pointer.
 */
enum RgglabStatus rgglab_spectrum_of_matrix(size_t n,
                                            const double *data,
                                            struct RgglabSpectrum **spectrum);

/**
 * Copies the eigenvalues in ascending order.
 *
 * # Safety
 * `spectrum` must be a live handle, `buf` must hold `capacity` doubles and
 * `len` must be a valid pointer.
 */
enum RgglabStatus rgglab_spectrum_values(const struct RgglabSpectrum *spectrum,
                                         double *buf,
                                         size_t capacity,
                                         size_t *len);

/**
 * `(1/n) sum (lambda_i / scale)^k`.
 *
 * # Safety
 * `spectrum` must be a live handle and `value` a valid pointer.
 */
enum RgglabStatus rgglab_spectrum_moment(const struct RgglabSpectrum *spectrum,
                                         uint32_t k,
                                         double scale,
                                         double *value);

/**
 * Kolmogorov–Smirnov distance of the ESD of `lambda / scale` to the
 * semicircle law.
 *
 * # Safety
 * `spectrum` must be a live handle and `value` a valid pointer.
 */
enum RgglabStatus rgglab_spectrum_ks_semicircle(const struct RgglabSpectrum *spectrum,
                                                double scale,
                                                double *value);

/**
 * Largest absolute value among all eigenvalues except the top one.
 *
 * # Safety
 * `spectrum` must be a live handle and `value` a valid pointer.
 */
enum RgglabStatus rgglab_spectrum_second(const struct RgglabSpectrum *spectrum, double *value);

/**
 * # Safety
 * `spectrum` must be null or a handle not yet freed.
 */
void rgglab_spectrum_free(struct RgglabSpectrum *spectrum);

/**
 * Semicircle moment `m_k` (Catalan number for even `k`, 0 for odd).
 *
 * # Safety
 * `value` must be a valid pointer.
 */
enum RgglabStatus rgglab_semicircle_moment(uint32_t k, double *value);

/**
 * Closed-form sparse-regime moment for expected degree `alpha`.
 *
 * # Safety
 * `value` must be a valid pointer.
 */
enum RgglabStatus rgglab_nu_alpha_moment(uint32_t k, double alpha, double *value);

/**
 * Statistics of the closed walk `walk[0], ..., walk[len - 1], walk[0]`.
 *
 * # Safety
 * `walk` must hold `len` values and `stats` be a valid pointer.
 */
enum RgglabStatus rgglab_walk_stats(const size_t *walk, size_t len, struct RgglabWalkStats *stats);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RGGLAB_H */

#ifndef CONIC_LMCF_H
#define CONIC_LMCF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes returned by every fallible function.
typedef enum ClmStatus {
  CLM_STATUS_OK = 0,
  CLM_STATUS_NULL_POINTER = 1,
  CLM_STATUS_INVALID_INPUT = 2,
  CLM_STATUS_EXCEPTIONAL_WEIGHT = 3,
  CLM_STATUS_WINDOW_TOO_SMALL = 4,
  CLM_STATUS_GRAPH_CONDITION = 5,
  CLM_STATUS_NUMERICAL = 6,
  CLM_STATUS_PARSE = 7,
  CLM_STATUS_IO = 8,
  CLM_STATUS_OUT_OF_RANGE = 9,
  CLM_STATUS_PANIC = 10,
} ClmStatus;

// A special Lagrangian cone from the built-in catalog.
typedef struct ClmCone ClmCone;

// Exponent set of a cone over a link, with counting functions.
typedef struct ClmExponentTable ClmExponentTable;

// Current state of a flow on T^m.
typedef struct ClmFlow ClmFlow;

// A solved radial mode u(t, r).
typedef struct ClmHeatSolution ClmHeatSolution;

// Eigenvalues of −Δ on a link, with multiplicities.
typedef struct ClmSpectrum ClmSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *clm_version(void);

// Length in bytes (without NUL) of the calling thread's last error message.
size_t clm_last_error_length(void);

// Copies the last error message, NUL-terminated and truncated to fit
// `cap` bytes. Returns the full message length (without NUL).
//
// # Safety
// `buf` must be NULL or point to `cap` writable bytes.
size_t clm_last_error_message(char *buf, size_t cap);

// Spectrum of the unit round sphere S^dim up to `lambda_max`.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum ClmStatus clm_spectrum_sphere(size_t dim, double lambda_max, struct ClmSpectrum **out);

// Spectrum of the flat torus with constant metric `metric` (row-major
// dim × dim) up to `lambda_max`.
//
// # Safety
// `metric` must point to dim·dim doubles; `out` must be valid.
enum ClmStatus clm_spectrum_torus(size_t dim,
                                  const double *metric,
                                  double lambda_max,
                                  struct ClmSpectrum **out);

// Number of distinct eigenvalues.
//
// # Safety
// `spectrum` must be a live handle; `out` must be valid.
enum ClmStatus clm_spectrum_len(const struct ClmSpectrum *spectrum, size_t *out);

// The `index`-th distinct eigenvalue and its multiplicity.
//
// # Safety
// `spectrum` must be a live handle; out-pointers must be valid.
enum ClmStatus clm_spectrum_get(const struct ClmSpectrum *spectrum,
                                size_t index,
                                double *lambda,
                                size_t *multiplicity);

// # Safety
// `spectrum` must be NULL or a handle not yet freed.
void clm_spectrum_free(struct ClmSpectrum *spectrum);

// Exponent table of the cone of dimension `m` over the spectrum's link,
// restricted to [lo, hi].
//
// # Safety
// `spectrum` must be a live handle; `out` must be valid.
enum ClmStatus clm_exponents_new(const struct ClmSpectrum *spectrum,
                                 size_t m,
                                 double lo,
                                 double hi,
                                 struct ClmExponentTable **out);

// Number of distinct exponents in the table.
//
// # Safety
// `table` must be a live handle; `out` must be valid.
enum ClmStatus clm_exponents_len(const struct ClmExponentTable *table, size_t *out);

// The `index`-th exponent (ascending) and its multiplicity.
//
// # Safety
// `table` must be a live handle; out-pointers must be valid.
enum ClmStatus clm_exponents_get(const struct ClmExponentTable *table,
                                 size_t index,
                                 double *alpha,
                                 size_t *multiplicity);

// Counting function M(δ).
//
// # Safety
// `table` must be a live handle; `out` must be valid.
enum ClmStatus clm_exponents_count_m(const struct ClmExponentTable *table,
                                     double delta,
                                     int64_t *out);

// Counting function N(δ).
//
// # Safety
// `table` must be a live handle; `out` must be valid.
enum ClmStatus clm_exponents_count_n(const struct ClmExponentTable *table,
                                     double delta,
                                     int64_t *out);

// # Safety
// `table` must be NULL or a handle not yet freed.
void clm_exponents_free(struct ClmExponentTable *table);

// Looks up a catalog cone by name ("hl-torus-3", "plane-3").
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be valid.
enum ClmStatus clm_cone_from_catalog(const char *name, struct ClmCone **out);

// Stability index and the two moment-map ranks (translations, su(m)).
//
// # Safety
// `cone` must be a live handle; out-pointers must be valid.
enum ClmStatus clm_cone_stability(const struct ClmCone *cone,
                                  int64_t *index,
                                  size_t *rank_translations,
                                  size_t *rank_su);

// Fredholm index −M(γ) of the Laplacian on the cone with weight γ.
// Fails with `CLM_STATUS_EXCEPTIONAL_WEIGHT` when γ is an exponent.
//
// # Safety
// `cone` must be a live handle; `out` must be valid.
enum ClmStatus clm_cone_fredholm_index(const struct ClmCone *cone, double gamma, int64_t *out);

// # Safety
// `cone` must be NULL or a handle not yet freed.
void clm_cone_free(struct ClmCone *cone);

// Solves ∂ₜu = Δu + coef·r^power for the mode of link eigenvalue
// `lambda` on the cone of dimension `m`, with zero initial and outer
// boundary data, on a graded grid of `cells` cells over [0, radius].
//
// # Safety
// `out` must be valid.
enum ClmStatus clm_heat_solve_power(size_t m,
                                    double lambda,
                                    double radius,
                                    size_t cells,
                                    double grading,
                                    double t_end,
                                    double dt,
                                    double coef,
                                    double power,
                                    struct ClmHeatSolution **out);

// Number of radial nodes.
//
// # Safety
// `sol` must be a live handle; `out` must be valid.
enum ClmStatus clm_heat_len(const struct ClmHeatSolution *sol, size_t *out);

// Copies the radial nodes into `buf` (capacity `cap`).
//
// # Safety
// `sol` must be a live handle; `buf` must hold `cap` doubles.
enum ClmStatus clm_heat_nodes(const struct ClmHeatSolution *sol, double *buf, size_t cap);

// Copies the solution at the final time into `buf` (capacity `cap`).
//
// # Safety
// `sol` must be a live handle; `buf` must hold `cap` doubles.
enum ClmStatus clm_heat_final(const struct ClmHeatSolution *sol, double *buf, size_t cap);

// # Safety
// `sol` must be NULL or a handle not yet freed.
void clm_heat_free(struct ClmHeatSolution *sol);

// Starts a flow on an n^m periodic grid from `amplitude · expr(x1, x2, x3)`.
//
// # Safety
// `expr` must be a NUL-terminated string; `out` must be valid.
enum ClmStatus clm_flow_new(size_t m,
                            size_t n,
                            const char *expr,
                            double amplitude,
                            struct ClmFlow **out);

// Advances the flow to time `t_end` with step `dt` (0 selects 0.25·dx²).
// The handle is left unchanged on failure.
//
// # Safety
// `flow` must be a live handle.
enum ClmStatus clm_flow_evolve(struct ClmFlow *flow, double t_end, double dt);

// Number of grid nodes n^m.
//
// # Safety
// `flow` must be a live handle; `out` must be valid.
enum ClmStatus clm_flow_len(const struct ClmFlow *flow, size_t *out);

// Current time.
//
// # Safety
// `flow` must be a live handle; `out` must be valid.
enum ClmStatus clm_flow_time(const struct ClmFlow *flow, double *out);

// sup |θ| of the current state.
//
// # Safety
// `flow` must be a live handle; `out` must be valid.
enum ClmStatus clm_flow_sup_theta(const struct ClmFlow *flow, double *out);

// Copies the potential u (axis 0 fastest) into `buf` (capacity `cap`).
//
// # Safety
// `flow` must be a live handle; `buf` must hold `cap` doubles.
enum ClmStatus clm_flow_field(const struct ClmFlow *flow, double *buf, size_t cap);

// Copies the Lagrangian angle θ into `buf` (capacity `cap`).
//
// # Safety
// `flow` must be a live handle; `buf` must hold `cap` doubles.
enum ClmStatus clm_flow_theta(const struct ClmFlow *flow, double *buf, size_t cap);

// # Safety
// `flow` must be NULL or a handle not yet freed.
void clm_flow_free(struct ClmFlow *flow);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONIC_LMCF_H */

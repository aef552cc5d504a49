/* C interface to the nonrel-lab solver library. */

#ifndef NONREL_LAB_H
#define NONREL_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. Non-zero means the out parameters are
// untouched; nrl_last_error_message describes the failure.
typedef enum NrlStatus {
  NRL_OK = 0,
  NRL_INVALID = 1,
  NRL_CONFIG = 2,
  NRL_SOLVER = 3,
  NRL_IO = 4,
  NRL_NULL_POINTER = 5,
  NRL_PANIC = 6,
} NrlStatus;

typedef struct NrlField NrlField;

typedef struct NrlGrid NrlGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message into buf (truncated, always
// nul-terminated when cap > 0) and returns the full message length in
// bytes, excluding the terminator.
size_t nrl_last_error_message(char *buf, size_t cap);

// Static library version string; never freed by the caller.
const char *nrl_version(void);

// Periodic grid: d axes, n points per axis (power of two), side length
// box_len. On success *out owns the handle; release with nrl_grid_free.
enum NrlStatus nrl_grid_new(uint32_t d, uint32_t n, double box_len, struct NrlGrid **out);

void nrl_grid_free(struct NrlGrid *grid);

// Total number of grid points (n^d).
enum NrlStatus nrl_grid_total(const struct NrlGrid *grid, size_t *out);

// Deterministic smooth random field with unit L2 norm; spectral
// amplitude falls off like exp(-decay |xi|).
enum NrlStatus nrl_field_random(const struct NrlGrid *grid,
                                uint64_t seed,
                                double decay,
                                struct NrlField **out);

void nrl_field_free(struct NrlField *field);

// Multiplies the field by the complex scalar re + i im.
enum NrlStatus nrl_field_scale(struct NrlField *field, double re, double im);

enum NrlStatus nrl_field_norm_l2(const struct NrlField *field, double *out);

// Sobolev H^k norm with weight (1 + |xi|^2)^k.
enum NrlStatus nrl_field_sobolev(const struct NrlField *field, double k, double *out);

// H^k norm of the difference of two fields on the same grid.
enum NrlStatus nrl_field_error(const struct NrlField *a,
                               const struct NrlField *b,
                               double k,
                               double *out);

// Copies the physical-space values into caller arrays of length len
// (which must equal nrl_grid_total).
enum NrlStatus nrl_field_values(const struct NrlField *field,
                                double *out_re,
                                double *out_im,
                                size_t len);

// Integrates the relativistic flow from the given state over [0, t_end]
// with step dt; *out_field receives the final state and out_drift (may
// be null) the relative energy drift.
enum NrlStatus nrl_evolve_wave(const struct NrlField *field,
                               double c,
                               double lambda,
                               uint32_t l,
                               uint32_t r,
                               double dt,
                               double t_end,
                               struct NrlField **out_field,
                               double *out_drift);

// Same contract for the order-r slow flow.
enum NrlStatus nrl_evolve_slow(const struct NrlField *field,
                               double c,
                               double lambda,
                               uint32_t l,
                               uint32_t r,
                               double dt,
                               double t_end,
                               struct NrlField **out_field,
                               double *out_drift);

// Applies the near-identity change of variables (direction +1) or its
// inverse (-1).
enum NrlStatus nrl_transform(const struct NrlField *field,
                             double c,
                             double lambda,
                             uint32_t l,
                             int32_t direction,
                             struct NrlField **out_field);

// Exact combined quintic coefficient for degree parameter l, as a
// reduced fraction.
enum NrlStatus nrl_derive_combined(uint32_t l, int64_t *out_num, int64_t *out_den);

// Membership test for an exponent pair: kind 0 = free scaling line,
// 1 = order-r scaling line, 2 = order-r quadrilateral. Writes 1 or 0
// to *out_admissible; the reason lands in the last-error slot either
// way (query it with nrl_last_error_message).
enum NrlStatus nrl_admissible(uint32_t kind,
                              double p,
                              double q,
                              uint32_t d,
                              uint32_t r,
                              int32_t *out_admissible);

// Parses a flat key=value config text and reports validity; a cheap
// syntax gate for embedders shipping config files. text must be a
// nul-terminated C string.
enum NrlStatus nrl_config_check(const char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NONREL_LAB_H */

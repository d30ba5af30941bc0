#ifndef MINKOWSKI_GRAPHS_H
#define MINKOWSKI_GRAPHS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>

typedef enum MkgCausalType {
  MKG_CAUSAL_TYPE_SPACE_LIKE = 0,
  MKG_CAUSAL_TYPE_TIME_LIKE = 1,
  MKG_CAUSAL_TYPE_LIGHT_LIKE = 2,
} MkgCausalType;

typedef enum MkgStatus {
  MKG_STATUS_OK = 0,
  MKG_STATUS_NULL_POINTER = 1,
  MKG_STATUS_INVALID_UTF8 = 2,
  MKG_STATUS_SYNTAX = 3,
  MKG_STATUS_ARITY = 4,
  MKG_STATUS_DOMAIN = 5,
  MKG_STATUS_LIGHT_LIKE = 6,
  MKG_STATUS_NOT_SPACE_LIKE = 7,
  MKG_STATUS_MIXED_CAUSAL_TYPE = 8,
  MKG_STATUS_INVALID_PARAMETER = 9,
  MKG_STATUS_HYPOTHESIS_FAILURE = 10,
  MKG_STATUS_SOLVER_FAILURE = 11,
  MKG_STATUS_BUFFER_TOO_SMALL = 12,
  MKG_STATUS_PANIC = 13,
  MKG_STATUS_IO = 14,
} MkgStatus;

// Opaque radial profile.
typedef struct MkgRadialProfile MkgRadialProfile;

// Opaque graph surface.
typedef struct MkgSurface MkgSurface;

// Numeric part of a check report; metadata stays on the Rust side.
typedef struct MkgCheckReport {
  double lhs;
  double rhs;
  double residual;
  double tolerance;
  double quadrature_error;
  bool passed;
} MkgCheckReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *mkg_last_error(void);

// Parse `text` as a field in `u1..un`.
//
// # Safety
// `text_ptr` must be a NUL-terminated string and `out` a writable pointer.
enum MkgStatus mkg_surface_parse(const char *text_ptr, size_t n, struct MkgSurface **out);

// The hyperboloid of constant mean curvature `h` over `R^n`.
//
// # Safety
// `out` must be a writable pointer.
enum MkgStatus mkg_surface_hyperboloid(size_t n, double h, struct MkgSurface **out);

// The hyperplane `a . u + b`; `a` holds `n` slopes.
//
// # Safety
// `a` must point to `n` readable doubles and `out` must be writable.
enum MkgStatus mkg_surface_hyperplane(size_t n, const double *a, double b, struct MkgSurface **out);

// The translation surface `u_n + h(u1)` for a profile `h` in `u1`.
//
// # Safety
// `profile` must be a NUL-terminated string and `out` must be writable.
enum MkgStatus mkg_surface_translation(size_t n, const char *profile, struct MkgSurface **out);

// Release a surface. Null is ignored.
//
// # Safety
// `s` must come from one of the `mkg_surface_*` constructors and not be used afterwards.
void mkg_surface_free(struct MkgSurface *s);

// Dimension `n` of the parameter space, or 0 for a null handle.
//
// # Safety
// `s` must be null or a live handle.
size_t mkg_surface_dim(const struct MkgSurface *s);

// Causal type at `point` with light-like band `tau`.
//
// # Safety
// `point` must hold `len` doubles; `out` must be writable.
enum MkgStatus mkg_classify(const struct MkgSurface *s,
                            const double *point,
                            size_t len,
                            double tau,
                            enum MkgCausalType *out);

// Mean curvature with respect to the upward normal.
//
// # Safety
// `point` must hold `len` doubles; `out` must be writable.
enum MkgStatus mkg_mean_curvature(const struct MkgSurface *s,
                                  const double *point,
                                  size_t len,
                                  double *out);

// `|grad psi| / sqrt|1 - |grad psi|^2|`.
//
// # Safety
// `point` must hold `len` doubles; `out` must be writable.
enum MkgStatus mkg_tilt(const struct MkgSurface *s, const double *point, size_t len, double *out);

// Hyperbolic angle between the normal and the vertical; space-like points only.
//
// # Safety
// `point` must hold `len` doubles; `out` must be writable.
enum MkgStatus mkg_hyperbolic_angle(const struct MkgSurface *s,
                                    const double *point,
                                    size_t len,
                                    double *out);

// Unit normal, written as `n + 1` doubles into `out` of capacity `out_len`.
//
// # Safety
// `point` must hold `len` doubles; `out` must have room for `out_len` doubles.
enum MkgStatus mkg_unit_normal(const struct MkgSurface *s,
                               const double *point,
                               size_t len,
                               double *out,
                               size_t out_len);

// Volume of the unit `n`-ball and area of the unit `(n-1)`-sphere.
//
// # Safety
// `volume` and `area` must be writable.
enum MkgStatus mkg_unit_ball_constants(size_t n, double *volume, double *area);

// Integral of `nH` over the ball of radius `radius` against the boundary flux,
// with default quadrature and tolerance.
//
// # Safety
// `out` must be writable.
enum MkgStatus mkg_stokes_check(const struct MkgSurface *s,
                                double radius,
                                struct MkgCheckReport *out);

// Smallest `M` with `tilt <= M |u|^{2k}` on the sampled ball.
//
// # Safety
// `out` must be writable.
enum MkgStatus mkg_fit_gradient_bound(const struct MkgSurface *s,
                                      double radius,
                                      double k,
                                      double *out);

// Mean curvature bound `alpha <= M R^{2k-1}` given the gradient bound `(M, k)`.
// A bound that does not hold on the ball yields `MkgStatus::HypothesisFailure`.
//
// # Safety
// `out` must be writable.
enum MkgStatus mkg_heinz_check(const struct MkgSurface *s,
                               double radius,
                               double m,
                               double k,
                               struct MkgCheckReport *out);

// `min |H|` against the boundary-to-volume ratio on a space-like ball.
//
// # Safety
// `out` must be writable.
enum MkgStatus mkg_salavessa_check(const struct MkgSurface *s,
                                   double radius,
                                   struct MkgCheckReport *out);

// Radial profile of the constant mean curvature graph on `[0, r_max]`.
//
// # Safety
// `out` must be writable.
enum MkgStatus mkg_solve_radial(size_t n,
                                double h,
                                double r_max,
                                double step,
                                struct MkgRadialProfile **out);

// Number of grid radii, or 0 for a null handle.
//
// # Safety
// `p` must be null or a live handle.
size_t mkg_radial_len(const struct MkgRadialProfile *p);

// Copy the columns `r`, `psi` and `psi'` into buffers of capacity `len`.
//
// # Safety
// Each buffer must have room for `len` doubles.
enum MkgStatus mkg_radial_columns(const struct MkgRadialProfile *p,
                                  double *r,
                                  double *psi,
                                  double *psi_prime,
                                  size_t len);

// Release a radial profile. Null is ignored.
//
// # Safety
// `p` must come from [`mkg_solve_radial`] and not be used afterwards.
void mkg_radial_free(struct MkgRadialProfile *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MINKOWSKI_GRAPHS_H */

#ifndef KP_FFI_H
#define KP_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KpStatus {
  KP_STATUS_OK = 0,
  KP_STATUS_NULL_POINTER = 1,
  KP_STATUS_INVALID_GRID = 2,
  KP_STATUS_INVALID_PARAMETER = 3,
  KP_STATUS_DOMAIN = 4,
  KP_STATUS_GRID_MISMATCH = 5,
  KP_STATUS_BLOW_UP = 6,
  KP_STATUS_DATA_TOO_LARGE = 7,
  KP_STATUS_TOO_COARSE = 8,
  KP_STATUS_FORMAT = 9,
  KP_STATUS_IO = 10,
  KP_STATUS_OTHER = 11,
  KP_STATUS_PANIC = 12,
} KpStatus;

/**
 * Fourier coefficients of a field on a grid.
 */
typedef struct KpField KpField;

/**
 * Periodic box and its wavenumber tables.
 */
typedef struct KpGrid KpGrid;

/**
 * `ω = ξ³ − γ μ²/ξ`, nonlinearity `β u u_x`.
 */
typedef struct KpParams {
  double gamma;
  double beta;
} KpParams;

typedef struct KpDiagnostics {
  double l2;
  double hamiltonian;
  double energy_norm;
} KpDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 */
size_t kp_last_error_message(char *buf, size_t len);

struct KpParams kp_params_kp1(void);

struct KpParams kp_params_kp2(void);

enum KpStatus kp_dispersion_symbol(double xi, double mu, struct KpParams p, double *out);

enum KpStatus kp_grid_new(double lx, double ly, size_t nx, size_t ny, struct KpGrid **out);

void kp_grid_free(struct KpGrid *grid);

enum KpStatus kp_grid_shape(const struct KpGrid *grid, size_t *nx, size_t *ny);

enum KpStatus kp_field_from_real(const struct KpGrid *grid,
                                 const double *samples,
                                 size_t len,
                                 struct KpField **out);

/**
 * `coeffs` holds `2 * nx * ny` doubles.
 */
enum KpStatus kp_field_from_coeffs(const struct KpGrid *grid,
                                   const double *coeffs,
                                   size_t len,
                                   struct KpField **out);

/**
 * `A · ∂x exp(−x²/σx² − y²/σy²)` up to the factor `σx²/2`.
 */
enum KpStatus kp_field_gaussian(const struct KpGrid *grid,
                                double amplitude,
                                double sigma_x,
                                double sigma_y,
                                struct KpField **out);

enum KpStatus kp_field_clone(const struct KpField *field, struct KpField **out);

void kp_field_free(struct KpField *field);

/**
 * Number of grid points; physical buffers have this length, coefficient
 * buffers twice it.
 */
enum KpStatus kp_field_len(const struct KpField *field, size_t *out);

enum KpStatus kp_field_to_real(const struct KpField *field, double *buf, size_t len);

enum KpStatus kp_field_coeffs(const struct KpField *field, double *buf, size_t len);

enum KpStatus kp_field_save(const struct KpField *field, const char *path_utf8);

enum KpStatus kp_field_load(const char *path_utf8, struct KpField **out);

enum KpStatus kp_l2_norm(const struct KpField *field, double *out);

enum KpStatus kp_besov_norm(const struct KpField *field, double s, double *out);

enum KpStatus kp_weighted_besov_norm(const struct KpField *field, double r, double *out);

/**
 * Energy part `‖u‖ + ‖∂x u‖ + ‖∂x⁻¹∂y u‖` and weight part `‖y u‖`.
 */
enum KpStatus kp_energy_space_norm(const struct KpField *field, double *energy, double *weight);

enum KpStatus kp_diagnostics(const struct KpField *field,
                             struct KpParams p,
                             struct KpDiagnostics *out);

/**
 * Free evolution `S(t)`.
 */
enum KpStatus kp_linear_propagate(const struct KpField *field,
                                  double t,
                                  struct KpParams p,
                                  struct KpField **out);

/**
 * Nonlinear evolution to `t_final` with integrating-factor RK4 and 2/3 dealiasing.
 */
enum KpStatus kp_evolve(const struct KpField *field,
                        double dt,
                        double t_final,
                        struct KpParams p,
                        struct KpField **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KP_FFI_H */

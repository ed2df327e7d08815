#ifndef FMPM_H
#define FMPM_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FmpmStatus {
  FMPM_STATUS_OK = 0,
  FMPM_STATUS_NULL_POINTER = 1,
  FMPM_STATUS_INVALID_CONFIG = 2,
  FMPM_STATUS_PARTICLE_OUTSIDE_GRID = 3,
  FMPM_STATUS_ELEMENT_INVERSION = 4,
  FMPM_STATUS_UNSUPPORTED = 5,
  /**
   * Particle velocities stopped being finite.
   */
  FMPM_STATUS_UNSTABLE = 6,
  FMPM_STATUS_BUFFER_TOO_SMALL = 7,
  FMPM_STATUS_INTERNAL = 8,
} FmpmStatus;

/**
 * Opaque simulation handle.
 */
typedef struct FmpmSim FmpmSim;

typedef struct FmpmStepInfo {
  double dt;
  /**
   * FMPM passes used this step; 0 for a FLIP step.
   */
  size_t order;
  size_t contact_nodes;
  double wall_seconds;
} FmpmStepInfo;

typedef struct FmpmEnergy {
  double time;
  double kinetic;
  double work;
  double total;
  /**
   * Positive is loss.
   */
  double dissipation;
} FmpmEnergy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds one of the benchmark problems `vibrate`, `mms`, `splitbar` or
 * `disks`. `config_toml` holds TOML overrides and may be null. Runs are
 * serial and bit-reproducible.
 *
 * Safety: `problem` and a non-null `config_toml` must be NUL-terminated strings;
 * `out_sim` must be writable.
 */
enum FmpmStatus fmpm_sim_new_benchmark(const char *problem,
                                       const char *config_toml,
                                       double scale,
                                       struct FmpmSim **out_sim);

/**
 * Releases a handle. Null is ignored.
 *
 * Safety: `sim` must come from [`fmpm_sim_new_benchmark`] and not be used afterwards.
 */
void fmpm_sim_free(struct FmpmSim *sim);

/**
 * Advances one step at the stable time step. `info` may be null.
 *
 * Safety: `sim` must be a live handle; a non-null `info` must be writable.
 */
enum FmpmStatus fmpm_sim_step(struct FmpmSim *sim, struct FmpmStepInfo *info);

/**
 * Steps until the simulation time reaches `t_end`, shortening the last step.
 *
 * Safety: `sim` must be a live handle.
 */
enum FmpmStatus fmpm_sim_run_until(struct FmpmSim *sim, double t_end);

/**
 * Safety: `sim` must be a live handle and `time` writable.
 */
enum FmpmStatus fmpm_sim_time(const struct FmpmSim *sim, double *time);

/**
 * Safety: `sim` must be a live handle and `energy` writable.
 */
enum FmpmStatus fmpm_sim_energy(const struct FmpmSim *sim, struct FmpmEnergy *energy);

/**
 * Safety: `sim` must be a live handle and `count` writable.
 */
enum FmpmStatus fmpm_sim_particle_count(const struct FmpmSim *sim, size_t *count);

/**
 * Writes `x0, y0, x1, y1, ...` into `buf`, which holds `len` doubles.
 *
 * Safety: `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum FmpmStatus fmpm_sim_copy_positions(const struct FmpmSim *sim, double *buf, size_t len);

/**
 * Same layout as [`fmpm_sim_copy_positions`].
 *
 * Safety: `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum FmpmStatus fmpm_sim_copy_velocities(const struct FmpmSim *sim, double *buf, size_t len);

/**
 * Runs the solver self-check on 50 random instances. `failures` receives
 * the number of failed comparisons and may be null.
 *
 * Safety: A non-null `failures` must be writable.
 */
enum FmpmStatus fmpm_oracle_check(size_t *failures);

/**
 * Message of the last failure on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *fmpm_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FMPM_H */

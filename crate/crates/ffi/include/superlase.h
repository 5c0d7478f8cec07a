#ifndef SUPERLASE_H
#define SUPERLASE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_UTF8 = 2,
  SL_STATUS_DOMAIN = 3,
  SL_STATUS_CONFIG = 4,
  SL_STATUS_IO = 5,
  SL_STATUS_SINGULAR = 6,
  SL_STATUS_NO_MINIMUM = 7,
  SL_STATUS_BRACKET = 8,
  SL_STATUS_INTEGRATION = 9,
  SL_STATUS_PANIC = 10,
} SlStatus;

typedef enum SlPhase {
  SL_PHASE_NORMAL = 0,
  SL_PHASE_SUPERRADIANT = 1,
  SL_PHASE_CRITICAL = 2,
} SlPhase;

// Opaque parameter set.
typedef struct SlParams SlParams;

// Closed-form steady state. Complex amplitudes are split into re/im.
typedef struct SlSteadyState {
  double a1_re;
  double a1_im;
  double a2_re;
  double a2_im;
  double j_minus_re;
  double j_minus_im;
  double j_z;
  double photons_cavity2;
  enum SlPhase phase;
} SlSteadyState;

typedef struct SlGainBreakdown {
  double delta_n;
  double g0;
  double g1;
  double gain;
  double freq_pull;
  double drive_re;
  double drive_im;
  double alpha;
  double beta;
  double n_b;
} SlGainBreakdown;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL if none.
// The pointer stays valid until the next failing call on the same thread.
const char *sl_last_error_message(void);

// Static, NUL-terminated name of a status code; "unknown" for values
// outside `SlStatus`.
const char *sl_status_name(int32_t status);

// Library version as a static NUL-terminated string.
const char *sl_version(void);

// Bundled ⁸⁷Rb parameter set.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum SlStatus sl_params_paper(struct SlParams **out);

// Parse a parameter file's contents (sectioned `key_unit = value`).
//
// # Safety
// `text` must be a NUL-terminated string; `out` as for `sl_params_paper`.
enum SlStatus sl_params_from_str(const char *text, struct SlParams **out);

// Load a parameter file from disk.
//
// # Safety
// `path` must be a NUL-terminated string; `out` as for `sl_params_paper`.
enum SlStatus sl_params_from_file(const char *path, struct SlParams **out);

// Copy of `params` with the pump–cavity detuning replaced (rad/s).
//
// # Safety
// `params` must be a live handle; `out` as for `sl_params_paper`.
enum SlStatus sl_params_with_detuning(const struct SlParams *params,
                                      double detuning,
                                      struct SlParams **out);

// Release a handle. NULL is ignored.
//
// # Safety
// `params` must be NULL or a handle not yet freed.
void sl_params_free(struct SlParams *params);

// Recoil frequency ħk²/2m (rad/s).
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum SlStatus sl_recoil_frequency(const struct SlParams *params, double *out);

// Critical coupling λ_c (rad/s).
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum SlStatus sl_critical_coupling(const struct SlParams *params, double *out);

// Detuning in [lo, hi] (rad/s) minimizing λ_c, found from a `grid`-point
// scan refined by golden-section search.
//
// # Safety
// `params` must be a live handle; both out pointers must be writable.
enum SlStatus sl_minimize_critical_coupling(const struct SlParams *params,
                                            double lo,
                                            double hi,
                                            uintptr_t grid,
                                            double *out_detuning,
                                            double *out_lambda_c);

// Photons in the atom cavity, |a2|², at coupling `lambda` (rad/s).
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum SlStatus sl_intracavity_photons(const struct SlParams *params, double lambda, double *out);

// Closed-form steady state at coupling `lambda` (rad/s).
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum SlStatus sl_steady_state(const struct SlParams *params,
                              double lambda,
                              struct SlSteadyState *out);

// Mechanical gain and its ingredients at coupling `lambda` (rad/s).
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum SlStatus sl_mechanical_gain(const struct SlParams *params,
                                 double lambda,
                                 struct SlGainBreakdown *out);

// Lasing threshold λ_th (rad/s) searched over the default bracket
// [1.001 λ_c, 20 λ_c].
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum SlStatus sl_threshold_coupling(const struct SlParams *params, double *out);

// Lasing threshold searched over the bracket [lo, hi] (rad/s).
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum SlStatus sl_threshold_coupling_in(const struct SlParams *params,
                                       double lo,
                                       double hi,
                                       double *out);

// Pump power (W) needed for coupling `lambda` (rad/s).
//
// # Safety
// `params` must be a live handle; `out` must be writable.
enum SlStatus sl_pump_power(const struct SlParams *params, double lambda, double *out);

// Stimulated phonon number exp(2(G − γ_m)/γ_m). Pure; never fails.
double sl_phonon_number(double gain, double gamma_m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPERLASE_H */

/* C interface to the qmem superconducting-memristor simulator. */

#ifndef QMEM_H
#define QMEM_H

/* Generated from qmem-ffi by cbindgen; edit the Rust source, not this file. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Opaque run configuration; build with [`qmem_config_default`] or
// [`qmem_config_parse`], mutate with [`qmem_config_apply`].
typedef struct QmemConfig QmemConfig;

// Opaque hysteresis analysis of one trajectory.
typedef struct QmemReport QmemReport;

// Opaque simulated trajectory.
typedef struct QmemSeries QmemSeries;

// Call status.  0 is success; everything else leaves a message in
// [`qmem_last_error`].
typedef int32_t QmemStatus;

// Column selector for [`qmem_series_data`]; order matches the CSV output
// where both exist.
typedef int32_t QmemColumn;

// Field selector for [`qmem_report_values`].
typedef int32_t QmemReportField;

// Derived circuit scales, all in SI units except the stated ratios.
typedef struct {
  // Transition frequency, rad/s.
  double omega10_rad_per_s;
  // The same frequency as ω₁₀/2π in GHz.
  double f10_ghz;
  // Zero-point phase spread (dimensionless).
  double g0;
  // Zero-point charge spread (dimensionless); g0·d0 = 1/2.
  double d0;
  // Shunt capacitance, farad.
  double c_d_farad;
  // Voltage unit V₀, volt.
  double v0_volt;
  // Conductance unit G₀, siemens.
  double g_unit_siemens;
  // Bias-independent weight P(g₀, 1, 0) of the 0↔1 matrix element.
  double p10;
} QmemScales;

// Validity and bath estimates for one configuration.
typedef struct {
  // Largest adiabaticity parameter reached by the drive.
  double alpha_max;
  // Quasiparticle frequency shift δω, rad/s.
  double delta_omega_qp_rad_per_s;
  // The same shift divided by ω₁₀.
  double delta_omega_relative;
  // Pure-dephasing strength |A_s^d|² at the evaluation bias.
  double dephasing_strength;
  // Dephasing/relaxation ratio; NaN where relaxation closes and the
  // ratio is undefined.
  double ratio_dephasing_to_relax;
  // The φ_d the bath quantities were evaluated at.
  double phi_d_eval;
} QmemDiagnostics;

#define QMEM_OK 0

// A parameter, config key, or argument was outside its domain.
#define QMEM_ERR_INVALID_INPUT 1

// The solver state left the finite range or drifted off its constraint.
#define QMEM_ERR_NUMERICAL 2

// A result failed an internal cross-check.
#define QMEM_ERR_SELF_CHECK 3

// A required pointer argument was NULL.
#define QMEM_ERR_NULL_ARGUMENT 4

// A string argument was not valid UTF-8.
#define QMEM_ERR_UTF8 5

// A panic was caught at the language boundary; state is unharmed but the
// result is unavailable.
#define QMEM_ERR_INTERNAL 6

// Dimensionless time.
#define QMEM_COLUMN_TAU 0

// Drive phase bias φ_d.
#define QMEM_COLUMN_PHI_D 1

// Exact derivative of the drive, dφ_d/dτ.
#define QMEM_COLUMN_DPHI_D 2

// Voltage ⟨V⟩/V₀.
#define QMEM_COLUMN_V 3

// In-phase quadrature of the coherence.
#define QMEM_COLUMN_U 4

// Quasiparticle current in G₀V₀ units.
#define QMEM_COLUMN_I 5

// Phase expectation ⟨φ⟩.
#define QMEM_COLUMN_PHI_AVG 6

// Inductively stored phase φ_ind.
#define QMEM_COLUMN_PHI_IND 7

// Quasiparticle conductance as G_qp/(C_dω₁₀) — the coherence equation's
// damping coefficient.
#define QMEM_COLUMN_G 8

// Relaxation rate γ/ω₁₀.
#define QMEM_COLUMN_GAMMA 9

// Accumulated damping exponent E(τ); e^{−E} is the amplitude envelope.
#define QMEM_COLUMN_DAMPING_EXP 10

// Total derivative of the current-ratio kernel.
#define QMEM_COLUMN_DGT 11

// Memory part of the same derivative.
#define QMEM_COLUMN_DGM 12

// Pinch-point times; one more entry than there are loops.
#define QMEM_REPORT_CROSSINGS 0

// Unsigned shoelace area of each loop.
#define QMEM_REPORT_LOOP_AREAS 1

// Signed memory quantifier of each loop.
#define QMEM_REPORT_QUANTIFIERS 2

// Memory-carried part of each quantifier.
#define QMEM_REPORT_MEMORY_PARTS 3

// Explicitly driven part of each quantifier.
#define QMEM_REPORT_EXPLICIT_PARTS 4

// |quantifier| of each loop over the classical reference.
#define QMEM_REPORT_RATIOS 5

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *qmem_version(void);

// Message of the most recent failure on this thread.  Never NULL; empty
// before the first failure.  The pointer is invalidated by the next failing
// qmem call on the same thread.
const char *qmem_last_error(void);

// The reference configuration (memristor model, resonant drive at φ₀ = π/2,
// 10 periods × 2000 steps).  Never fails.
QmemConfig *qmem_config_default(void);

// Parse config text (same `key=value` format as the CLI).  NULL on error.
//
// # Safety
// `text` must be NULL or a NUL-terminated string.
QmemConfig *qmem_config_parse(const char *text);

// Apply one or more `key=value` lines to a config, atomically: either every
// assignment validates (cross-key constraints included) and the config is
// updated, or the config is left untouched and an error status returned.
// Use this rather than [`qmem_config_set`] for keys that are only valid
// together, e.g. `preset=custom`, `v_init`, `u_init`.
//
// # Safety
// `cfg` must be a live config handle; `assignments` a NUL-terminated string.
QmemStatus qmem_config_apply(QmemConfig *cfg, const char *assignments);

// Set a single config key.  Equivalent to [`qmem_config_apply`] with one
// line.
//
// # Safety
// `cfg` must be a live config handle; `key` and `value` NUL-terminated
// strings.
QmemStatus qmem_config_set(QmemConfig *cfg, const char *key, const char *value);

// # Safety
// `cfg` must be NULL or a pointer from a config constructor, not yet freed.
void qmem_config_free(QmemConfig *cfg);

// Run the configured model.  NULL on error.
//
// # Safety
// `cfg` must be a live config handle.
QmemSeries *qmem_simulate(const QmemConfig *cfg);

// Number of samples in every column of the series; 0 for NULL.
//
// # Safety
// `series` must be NULL or a live series handle.
size_t qmem_series_len(const QmemSeries *series);

// Borrow one column as a contiguous array of [`qmem_series_len`] doubles.
// The pointer is valid until the series is freed.  NULL on bad selector.
//
// # Safety
// `series` must be a live series handle.
const double *qmem_series_data(const QmemSeries *series, QmemColumn column);

// Largest deviation from the solved phase identity seen during the run,
// radians.  NaN for NULL.
//
// # Safety
// `series` must be NULL or a live series handle.
double qmem_series_max_residual(const QmemSeries *series);

// # Safety
// `series` must be NULL or a pointer from [`qmem_simulate`], not yet freed.
void qmem_series_free(QmemSeries *series);

// Loop-by-loop hysteresis analysis of a series produced from `cfg`.
// NULL on error (including trajectories with no usable loop structure).
//
// # Safety
// Both handles must be live; `series` must come from this `cfg`.
QmemReport *qmem_hysteresis(const QmemConfig *cfg, const QmemSeries *series);

// Number of closed loops in the report; 0 for NULL.
//
// # Safety
// `report` must be NULL or a live report handle.
size_t qmem_report_loop_count(const QmemReport *report);

// Borrow one field of the report; its length is written to `out_len`
// (loop count for everything but crossings, which has one more entry).
// NULL on bad selector.  Valid until the report is freed.
//
// # Safety
// `report` must be a live report handle; `out_len` NULL or writable.
const double *qmem_report_values(const QmemReport *report, QmemReportField field, size_t *out_len);

// Classical loop quantifier all ratios are taken against.  NaN for NULL.
//
// # Safety
// `report` must be NULL or a live report handle.
double qmem_report_classical_ref(const QmemReport *report);

// # Safety
// `report` must be NULL or a pointer from [`qmem_hysteresis`], not yet freed.
void qmem_report_free(QmemReport *report);

// Derived circuit scales for a configuration.
//
// # Safety
// `cfg` must be a live config handle; `out` must be writable.
QmemStatus qmem_scales(const QmemConfig *cfg, QmemScales *out);

// Validity and bath diagnostics for a configuration.  Uses the configured
// bath if one was given, otherwise the reference bath for these scales.
//
// # Safety
// `cfg` must be a live config handle; `out` must be writable.
QmemStatus qmem_diagnostics(const QmemConfig *cfg, QmemDiagnostics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QMEM_H */

//! C ABI over the simulator: opaque handles, integer statuses, zero-copy
//! access to result columns.
//!
//! Conventions
//! - Constructors return NULL on failure; `qmem_last_error` returns the
//!   message (thread-local, valid until the next failing call on the same
//!   thread).
//! - Status-returning functions write through out-pointers only on `QMEM_OK`.
//! - Every handle type has exactly one `_free`; NULL is accepted and ignored
//!   there.  Pointers returned by `_data`/`_values` borrow from their handle
//!   and die with it.
//! - Handles are not synchronized; confine each to one thread or lock
//!   externally.

use qmem::analysis::{memory_quantifier, HysteresisReport};
use qmem::config::{parse_config, RunConfig};
use qmem::diagnostics::diagnostics_report;
use qmem::dynamics::{simulate, TimeSeries};
use qmem::error::QmemError;
use qmem::params::{derive_scales, BathParams};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Call status.  0 is success; everything else leaves a message in
/// [`qmem_last_error`].
pub type QmemStatus = i32;

pub const QMEM_OK: QmemStatus = 0;
/// A parameter, config key, or argument was outside its domain.
pub const QMEM_ERR_INVALID_INPUT: QmemStatus = 1;
/// The solver state left the finite range or drifted off its constraint.
pub const QMEM_ERR_NUMERICAL: QmemStatus = 2;
/// A result failed an internal cross-check.
pub const QMEM_ERR_SELF_CHECK: QmemStatus = 3;
/// A required pointer argument was NULL.
pub const QMEM_ERR_NULL_ARGUMENT: QmemStatus = 4;
/// A string argument was not valid UTF-8.
pub const QMEM_ERR_UTF8: QmemStatus = 5;
/// A panic was caught at the language boundary; state is unharmed but the
/// result is unavailable.
pub const QMEM_ERR_INTERNAL: QmemStatus = 6;

/// Column selector for [`qmem_series_data`]; order matches the CSV output
/// where both exist.
pub type QmemColumn = i32;

/// Dimensionless time.
pub const QMEM_COLUMN_TAU: QmemColumn = 0;
/// Drive phase bias φ_d.
pub const QMEM_COLUMN_PHI_D: QmemColumn = 1;
/// Exact derivative of the drive, dφ_d/dτ.
pub const QMEM_COLUMN_DPHI_D: QmemColumn = 2;
/// Voltage ⟨V⟩/V₀.
pub const QMEM_COLUMN_V: QmemColumn = 3;
/// In-phase quadrature of the coherence.
pub const QMEM_COLUMN_U: QmemColumn = 4;
/// Quasiparticle current in G₀V₀ units.
pub const QMEM_COLUMN_I: QmemColumn = 5;
/// Phase expectation ⟨φ⟩.
pub const QMEM_COLUMN_PHI_AVG: QmemColumn = 6;
/// Inductively stored phase φ_ind.
pub const QMEM_COLUMN_PHI_IND: QmemColumn = 7;
/// Quasiparticle conductance as G_qp/(C_dω₁₀) — the coherence equation's
/// damping coefficient.
pub const QMEM_COLUMN_G: QmemColumn = 8;
/// Relaxation rate γ/ω₁₀.
pub const QMEM_COLUMN_GAMMA: QmemColumn = 9;
/// Accumulated damping exponent E(τ); e^{−E} is the amplitude envelope.
pub const QMEM_COLUMN_DAMPING_EXP: QmemColumn = 10;
/// Total derivative of the current-ratio kernel.
pub const QMEM_COLUMN_DGT: QmemColumn = 11;
/// Memory part of the same derivative.
pub const QMEM_COLUMN_DGM: QmemColumn = 12;

/// Field selector for [`qmem_report_values`].
pub type QmemReportField = i32;

/// Pinch-point times; one more entry than there are loops.
pub const QMEM_REPORT_CROSSINGS: QmemReportField = 0;
/// Unsigned shoelace area of each loop.
pub const QMEM_REPORT_LOOP_AREAS: QmemReportField = 1;
/// Signed memory quantifier of each loop.
pub const QMEM_REPORT_QUANTIFIERS: QmemReportField = 2;
/// Memory-carried part of each quantifier.
pub const QMEM_REPORT_MEMORY_PARTS: QmemReportField = 3;
/// Explicitly driven part of each quantifier.
pub const QMEM_REPORT_EXPLICIT_PARTS: QmemReportField = 4;
/// |quantifier| of each loop over the classical reference.
pub const QMEM_REPORT_RATIOS: QmemReportField = 5;

/// Opaque run configuration; build with [`qmem_config_default`] or
/// [`qmem_config_parse`], mutate with [`qmem_config_apply`].
pub struct QmemConfig {
    entries: Vec<(String, String)>,
    parsed: RunConfig,
}

/// Opaque simulated trajectory.
pub struct QmemSeries {
    ts: TimeSeries,
}

/// Opaque hysteresis analysis of one trajectory.
pub struct QmemReport {
    rep: HysteresisReport,
}

/// Derived circuit scales, all in SI units except the stated ratios.
#[repr(C)]
pub struct QmemScales {
    /// Transition frequency, rad/s.
    pub omega10_rad_per_s: f64,
    /// The same frequency as ω₁₀/2π in GHz.
    pub f10_ghz: f64,
    /// Zero-point phase spread (dimensionless).
    pub g0: f64,
    /// Zero-point charge spread (dimensionless); g0·d0 = 1/2.
    pub d0: f64,
    /// Shunt capacitance, farad.
    pub c_d_farad: f64,
    /// Voltage unit V₀, volt.
    pub v0_volt: f64,
    /// Conductance unit G₀, siemens.
    pub g_unit_siemens: f64,
    /// Bias-independent weight P(g₀, 1, 0) of the 0↔1 matrix element.
    pub p10: f64,
}

/// Validity and bath estimates for one configuration.
#[repr(C)]
pub struct QmemDiagnostics {
    /// Largest adiabaticity parameter reached by the drive.
    pub alpha_max: f64,
    /// Quasiparticle frequency shift δω, rad/s.
    pub delta_omega_qp_rad_per_s: f64,
    /// The same shift divided by ω₁₀.
    pub delta_omega_relative: f64,
    /// Pure-dephasing strength |A_s^d|² at the evaluation bias.
    pub dephasing_strength: f64,
    /// Dephasing/relaxation ratio; NaN where relaxation closes and the
    /// ratio is undefined.
    pub ratio_dephasing_to_relax: f64,
    /// The φ_d the bath quantities were evaluated at.
    pub phi_d_eval: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let bytes: Vec<u8> = msg.bytes().map(|b| if b == 0 { b' ' } else { b }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(bytes).expect("NULs replaced"));
}

fn status_of(e: &QmemError) -> QmemStatus {
    match e {
        QmemError::Numerical { .. } | QmemError::Consistency { .. } => QMEM_ERR_NUMERICAL,
        QmemError::SelfCheck(_) => QMEM_ERR_SELF_CHECK,
        _ => QMEM_ERR_INVALID_INPUT,
    }
}

fn fail(e: &QmemError) -> QmemStatus {
    set_error(&e.to_string());
    status_of(e)
}

/// Split validated config text back into key/value pairs.  Only called on
/// text `parse_config` has already accepted, so every surviving line splits.
fn harvest(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(|raw| raw.split('#').next().unwrap_or("").trim())
        .filter(|line| !line.is_empty())
        .filter_map(|line| line.split_once('='))
        .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
        .collect()
}

fn render(entries: &[(String, String)]) -> String {
    entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

/// NULL-checked, UTF-8-checked view of a C string argument.
///
/// # Safety
/// `p` must be NULL or a NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, QmemStatus> {
    if p.is_null() {
        set_error(&format!("{what} is NULL"));
        return Err(QMEM_ERR_NULL_ARGUMENT);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        QMEM_ERR_UTF8
    })
}

fn guard_ptr<T>(f: impl FnOnce() -> *mut T) -> *mut T {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal panic at the language boundary");
        ptr::null_mut()
    })
}

fn guard_status(f: impl FnOnce() -> QmemStatus) -> QmemStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal panic at the language boundary");
        QMEM_ERR_INTERNAL
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qmem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on this thread.  Never NULL; empty
/// before the first failure.  The pointer is invalidated by the next failing
/// qmem call on the same thread.
#[no_mangle]
pub extern "C" fn qmem_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// The reference configuration (memristor model, resonant drive at φ₀ = π/2,
/// 10 periods × 2000 steps).  Never fails.
#[no_mangle]
pub extern "C" fn qmem_config_default() -> *mut QmemConfig {
    let parsed = parse_config("").expect("empty text is the reference config");
    Box::into_raw(Box::new(QmemConfig {
        entries: Vec::new(),
        parsed,
    }))
}

/// Parse config text (same `key=value` format as the CLI).  NULL on error.
///
/// # Safety
/// `text` must be NULL or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qmem_config_parse(text: *const c_char) -> *mut QmemConfig {
    guard_ptr(|| {
        let Ok(text) = str_arg(text, "config text") else {
            return ptr::null_mut();
        };
        match parse_config(text) {
            Ok(parsed) => Box::into_raw(Box::new(QmemConfig {
                entries: harvest(text),
                parsed,
            })),
            Err(e) => {
                fail(&e);
                ptr::null_mut()
            }
        }
    })
}

/// Apply one or more `key=value` lines to a config, atomically: either every
/// assignment validates (cross-key constraints included) and the config is
/// updated, or the config is left untouched and an error status returned.
/// Use this rather than [`qmem_config_set`] for keys that are only valid
/// together, e.g. `preset=custom`, `v_init`, `u_init`.
///
/// # Safety
/// `cfg` must be a live config handle; `assignments` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qmem_config_apply(
    cfg: *mut QmemConfig,
    assignments: *const c_char,
) -> QmemStatus {
    guard_status(|| {
        if cfg.is_null() {
            set_error("config handle is NULL");
            return QMEM_ERR_NULL_ARGUMENT;
        }
        let text = match str_arg(assignments, "assignments") {
            Ok(t) => t,
            Err(s) => return s,
        };
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if !line.is_empty() && !line.contains('=') {
                set_error(&format!("assignment line {}: expected key=value", k + 1));
                return QMEM_ERR_INVALID_INPUT;
            }
        }
        let cfg = &mut *cfg;
        let mut entries = cfg.entries.clone();
        for (k, v) in harvest(text) {
            match entries.iter_mut().find(|(name, _)| *name == k) {
                Some(slot) => slot.1 = v,
                None => entries.push((k, v)),
            }
        }
        match parse_config(&render(&entries)) {
            Ok(parsed) => {
                cfg.entries = entries;
                cfg.parsed = parsed;
                QMEM_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Set a single config key.  Equivalent to [`qmem_config_apply`] with one
/// line.
///
/// # Safety
/// `cfg` must be a live config handle; `key` and `value` NUL-terminated
/// strings.
#[no_mangle]
pub unsafe extern "C" fn qmem_config_set(
    cfg: *mut QmemConfig,
    key: *const c_char,
    value: *const c_char,
) -> QmemStatus {
    let key = match str_arg(key, "key") {
        Ok(k) => k,
        Err(s) => return s,
    };
    let value = match str_arg(value, "value") {
        Ok(v) => v,
        Err(s) => return s,
    };
    let line = CString::new(format!("{key}={value}")).unwrap_or_default();
    qmem_config_apply(cfg, line.as_ptr())
}

/// # Safety
/// `cfg` must be NULL or a pointer from a config constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qmem_config_free(cfg: *mut QmemConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Run the configured model.  NULL on error.
///
/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn qmem_simulate(cfg: *const QmemConfig) -> *mut QmemSeries {
    guard_ptr(|| {
        if cfg.is_null() {
            set_error("config handle is NULL");
            return ptr::null_mut();
        }
        let c = &(*cfg).parsed;
        match simulate(&c.system, &c.drive, &c.init, &c.solver) {
            Ok(ts) => Box::into_raw(Box::new(QmemSeries { ts })),
            Err(e) => {
                fail(&e);
                ptr::null_mut()
            }
        }
    })
}

/// Number of samples in every column of the series; 0 for NULL.
///
/// # Safety
/// `series` must be NULL or a live series handle.
#[no_mangle]
pub unsafe extern "C" fn qmem_series_len(series: *const QmemSeries) -> usize {
    if series.is_null() {
        return 0;
    }
    (*series).ts.len()
}

/// Borrow one column as a contiguous array of [`qmem_series_len`] doubles.
/// The pointer is valid until the series is freed.  NULL on bad selector.
///
/// # Safety
/// `series` must be a live series handle.
#[no_mangle]
pub unsafe extern "C" fn qmem_series_data(
    series: *const QmemSeries,
    column: QmemColumn,
) -> *const f64 {
    if series.is_null() {
        set_error("series handle is NULL");
        return ptr::null();
    }
    let ts = &(*series).ts;
    let col = match column {
        QMEM_COLUMN_TAU => &ts.tau,
        QMEM_COLUMN_PHI_D => &ts.phi_d,
        QMEM_COLUMN_DPHI_D => &ts.dphi_d,
        QMEM_COLUMN_V => &ts.v,
        QMEM_COLUMN_U => &ts.u,
        QMEM_COLUMN_I => &ts.i,
        QMEM_COLUMN_PHI_AVG => &ts.phi_avg,
        QMEM_COLUMN_PHI_IND => &ts.phi_ind,
        QMEM_COLUMN_G => &ts.g,
        QMEM_COLUMN_GAMMA => &ts.gamma,
        QMEM_COLUMN_DAMPING_EXP => &ts.damping_exp,
        QMEM_COLUMN_DGT => &ts.dgt,
        QMEM_COLUMN_DGM => &ts.dgm,
        _ => {
            set_error(&format!("no column {column}"));
            return ptr::null();
        }
    };
    col.as_ptr()
}

/// Largest deviation from the solved phase identity seen during the run,
/// radians.  NaN for NULL.
///
/// # Safety
/// `series` must be NULL or a live series handle.
#[no_mangle]
pub unsafe extern "C" fn qmem_series_max_residual(series: *const QmemSeries) -> f64 {
    if series.is_null() {
        return f64::NAN;
    }
    (*series).ts.max_residual
}

/// # Safety
/// `series` must be NULL or a pointer from [`qmem_simulate`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qmem_series_free(series: *mut QmemSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Loop-by-loop hysteresis analysis of a series produced from `cfg`.
/// NULL on error (including trajectories with no usable loop structure).
///
/// # Safety
/// Both handles must be live; `series` must come from this `cfg`.
#[no_mangle]
pub unsafe extern "C" fn qmem_hysteresis(
    cfg: *const QmemConfig,
    series: *const QmemSeries,
) -> *mut QmemReport {
    guard_ptr(|| {
        if cfg.is_null() || series.is_null() {
            set_error("config or series handle is NULL");
            return ptr::null_mut();
        }
        let c = &(*cfg).parsed;
        match memory_quantifier(&c.system, &c.drive, &(*series).ts) {
            Ok(rep) => Box::into_raw(Box::new(QmemReport { rep })),
            Err(e) => {
                fail(&e);
                ptr::null_mut()
            }
        }
    })
}

/// Number of closed loops in the report; 0 for NULL.
///
/// # Safety
/// `report` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn qmem_report_loop_count(report: *const QmemReport) -> usize {
    if report.is_null() {
        return 0;
    }
    (*report).rep.quantifiers.len()
}

/// Borrow one field of the report; its length is written to `out_len`
/// (loop count for everything but crossings, which has one more entry).
/// NULL on bad selector.  Valid until the report is freed.
///
/// # Safety
/// `report` must be a live report handle; `out_len` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn qmem_report_values(
    report: *const QmemReport,
    field: QmemReportField,
    out_len: *mut usize,
) -> *const f64 {
    if report.is_null() {
        set_error("report handle is NULL");
        return ptr::null();
    }
    let rep = &(*report).rep;
    let values = match field {
        QMEM_REPORT_CROSSINGS => &rep.crossings,
        QMEM_REPORT_LOOP_AREAS => &rep.loop_areas,
        QMEM_REPORT_QUANTIFIERS => &rep.quantifiers,
        QMEM_REPORT_MEMORY_PARTS => &rep.memory_parts,
        QMEM_REPORT_EXPLICIT_PARTS => &rep.explicit_parts,
        QMEM_REPORT_RATIOS => &rep.ratios,
        _ => {
            set_error(&format!("no report field {field}"));
            return ptr::null();
        }
    };
    if !out_len.is_null() {
        *out_len = values.len();
    }
    values.as_ptr()
}

/// Classical loop quantifier all ratios are taken against.  NaN for NULL.
///
/// # Safety
/// `report` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn qmem_report_classical_ref(report: *const QmemReport) -> f64 {
    if report.is_null() {
        return f64::NAN;
    }
    (*report).rep.classical_ref
}

/// # Safety
/// `report` must be NULL or a pointer from [`qmem_hysteresis`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qmem_report_free(report: *mut QmemReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Derived circuit scales for a configuration.
///
/// # Safety
/// `cfg` must be a live config handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmem_scales(cfg: *const QmemConfig, out: *mut QmemScales) -> QmemStatus {
    guard_status(|| {
        if cfg.is_null() || out.is_null() {
            set_error("config handle or out-pointer is NULL");
            return QMEM_ERR_NULL_ARGUMENT;
        }
        match derive_scales(&(*cfg).parsed.system) {
            Ok(s) => {
                out.write(QmemScales {
                    omega10_rad_per_s: s.omega10,
                    f10_ghz: s.omega10 / (std::f64::consts::TAU * 1e9),
                    g0: s.g0,
                    d0: s.d0,
                    c_d_farad: s.c_d,
                    v0_volt: s.v0_si,
                    g_unit_siemens: s.g_norm,
                    p10: s.p10,
                });
                QMEM_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Validity and bath diagnostics for a configuration.  Uses the configured
/// bath if one was given, otherwise the reference bath for these scales.
///
/// # Safety
/// `cfg` must be a live config handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmem_diagnostics(
    cfg: *const QmemConfig,
    out: *mut QmemDiagnostics,
) -> QmemStatus {
    guard_status(|| {
        if cfg.is_null() || out.is_null() {
            set_error("config handle or out-pointer is NULL");
            return QMEM_ERR_NULL_ARGUMENT;
        }
        let c = &(*cfg).parsed;
        let bath = match c.bath {
            Some(b) => b,
            None => match derive_scales(&c.system) {
                Ok(s) => BathParams::default_for(&s),
                Err(e) => return fail(&e),
            },
        };
        match diagnostics_report(&c.system, &c.drive, &bath, &c.solver) {
            Ok(d) => {
                out.write(QmemDiagnostics {
                    alpha_max: d.alpha_max,
                    delta_omega_qp_rad_per_s: d.delta_omega_qp,
                    delta_omega_relative: d.delta_omega_relative,
                    dephasing_strength: d.dephasing_strength,
                    ratio_dephasing_to_relax: d.ratio_dephasing_to_relax.unwrap_or(f64::NAN),
                    phi_d_eval: d.phi_d_eval,
                });
                QMEM_OK
            }
            Err(e) => fail(&e),
        }
    })
}

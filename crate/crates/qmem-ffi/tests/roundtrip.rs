//! The whole C surface exercised from Rust: handle lifecycles, error
//! reporting, and numerical sanity of what comes back through the pointers.

use qmem_ffi::*;
use std::ffi::{CStr, CString};

fn c(text: &str) -> CString {
    CString::new(text).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qmem_last_error()) }
        .to_str()
        .unwrap()
        .to_owned()
}

unsafe fn column(series: *const QmemSeries, col: QmemColumn) -> Vec<f64> {
    let n = qmem_series_len(series);
    let p = qmem_series_data(series, col);
    assert!(!p.is_null());
    std::slice::from_raw_parts(p, n).to_vec()
}

#[test]
fn full_pipeline_through_the_c_surface() {
    unsafe {
        let cfg = qmem_config_default();
        assert!(!cfg.is_null());

        let series = qmem_simulate(cfg);
        assert!(!series.is_null(), "{}", last_error());
        assert_eq!(qmem_series_len(series), 20_001);
        let v = column(series, QMEM_COLUMN_V);
        assert_eq!(v[0], 1.0, "blue preset starts at v = 1");
        assert!(qmem_series_max_residual(series) < 1e-6);

        let report = qmem_hysteresis(cfg, series);
        assert!(!report.is_null(), "{}", last_error());
        assert_eq!(qmem_report_loop_count(report), 19);
        let mut len = 0usize;
        let ratios = qmem_report_values(report, QMEM_REPORT_RATIOS, &mut len);
        assert!(!ratios.is_null());
        assert_eq!(len, 19);
        let r = std::slice::from_raw_parts(ratios, len);
        assert!((r[0] - 0.9867).abs() < 0.01);
        let crossings = qmem_report_values(report, QMEM_REPORT_CROSSINGS, &mut len);
        assert!(!crossings.is_null());
        assert_eq!(len, 20);
        assert!(qmem_report_classical_ref(report) > 0.0);

        let mut scales = std::mem::zeroed::<QmemScales>();
        assert_eq!(qmem_scales(cfg, &mut scales), QMEM_OK);
        assert!((scales.f10_ghz - 44.7214).abs() < 1e-3);
        assert!((scales.g0 * scales.d0 - 0.5).abs() < 1e-12);

        let mut diag = std::mem::zeroed::<QmemDiagnostics>();
        assert_eq!(qmem_diagnostics(cfg, &mut diag), QMEM_OK);
        assert!((diag.alpha_max - 0.1495).abs() < 0.0005);
        assert!(diag.delta_omega_qp_rad_per_s < 0.0);

        qmem_report_free(report);
        qmem_series_free(series);
        qmem_config_free(cfg);
    }
}

#[test]
fn apply_revalidates_atomically() {
    unsafe {
        let cfg = qmem_config_default();

        // a custom preset needs all three keys together
        let partial = c("preset=custom");
        assert_eq!(
            qmem_config_apply(cfg, partial.as_ptr()),
            QMEM_ERR_INVALID_INPUT
        );
        assert!(last_error().contains("custom"), "{}", last_error());

        let full = c("preset=custom\nv_init=0.3\nu_init=-0.7\nperiods=1");
        assert_eq!(qmem_config_apply(cfg, full.as_ptr()), QMEM_OK);
        let series = qmem_simulate(cfg);
        assert!(!series.is_null());
        assert_eq!(qmem_series_len(series), 2_001);
        let v = column(series, QMEM_COLUMN_V);
        assert_eq!(v[0], 0.3);
        qmem_series_free(series);

        // a later bad apply leaves the good state in place
        let bad = c("steps_per_period=3");
        assert_eq!(qmem_config_apply(cfg, bad.as_ptr()), QMEM_ERR_INVALID_INPUT);
        let series = qmem_simulate(cfg);
        assert!(
            !series.is_null(),
            "config must be unchanged after a failed apply"
        );
        assert_eq!(qmem_series_len(series), 2_001);
        qmem_series_free(series);

        qmem_config_free(cfg);
    }
}

#[test]
fn set_is_single_key_apply() {
    unsafe {
        let cfg = qmem_config_default();
        let (k, v) = (c("s_qp_ratio"), c("1e-4"));
        assert_eq!(qmem_config_set(cfg, k.as_ptr(), v.as_ptr()), QMEM_OK);
        let series = qmem_simulate(cfg);
        let env = column(series, QMEM_COLUMN_DAMPING_EXP);
        assert!(
            (-env[env.len() - 1]).exp() > 0.99,
            "weak damping keeps the amplitude"
        );
        qmem_series_free(series);

        let bogus = c("not_a_key");
        assert_eq!(
            qmem_config_set(cfg, bogus.as_ptr(), v.as_ptr()),
            QMEM_ERR_INVALID_INPUT
        );
        assert!(last_error().contains("not_a_key"));
        qmem_config_free(cfg);
    }
}

#[test]
fn parse_rejects_bad_text_with_a_message() {
    unsafe {
        let bad = c("preset=green");
        let cfg = qmem_config_parse(bad.as_ptr());
        assert!(cfg.is_null());
        assert!(last_error().contains("preset"), "{}", last_error());

        let good = c("# comment only\nmodel=oracle\n");
        let cfg = qmem_config_parse(good.as_ptr());
        assert!(!cfg.is_null());
        qmem_config_free(cfg);
    }
}

#[test]
fn null_arguments_are_reported_not_crashed() {
    unsafe {
        assert!(qmem_config_parse(std::ptr::null()).is_null());
        assert!(last_error().contains("NULL"));
        assert!(qmem_simulate(std::ptr::null()).is_null());
        assert_eq!(qmem_series_len(std::ptr::null()), 0);
        assert!(qmem_series_data(std::ptr::null(), QMEM_COLUMN_TAU).is_null());
        assert!(qmem_series_max_residual(std::ptr::null()).is_nan());
        assert!(qmem_hysteresis(std::ptr::null(), std::ptr::null()).is_null());
        assert_eq!(qmem_report_loop_count(std::ptr::null()), 0);
        assert!(qmem_report_classical_ref(std::ptr::null()).is_nan());
        assert_eq!(
            qmem_scales(std::ptr::null(), std::ptr::null_mut()),
            QMEM_ERR_NULL_ARGUMENT
        );
        assert_eq!(
            qmem_diagnostics(std::ptr::null(), std::ptr::null_mut()),
            QMEM_ERR_NULL_ARGUMENT
        );
        // frees tolerate NULL by contract
        qmem_config_free(std::ptr::null_mut());
        qmem_series_free(std::ptr::null_mut());
        qmem_report_free(std::ptr::null_mut());
    }
}

#[test]
fn bad_selectors_return_null_with_a_message() {
    unsafe {
        let cfg = qmem_config_default();
        let series = qmem_simulate(cfg);
        assert!(qmem_series_data(series, 99).is_null());
        assert!(last_error().contains("99"));
        let report = qmem_hysteresis(cfg, series);
        let mut len = 7usize;
        assert!(qmem_report_values(report, -1, &mut len).is_null());
        assert_eq!(len, 7, "out_len untouched on failure");
        qmem_report_free(report);
        qmem_series_free(series);
        qmem_config_free(cfg);
    }
}

#[test]
fn degenerate_series_yields_no_report() {
    unsafe {
        let text = c("preset=custom\nv_init=0\nu_init=0\nperiods=1");
        let cfg = qmem_config_parse(text.as_ptr());
        assert!(!cfg.is_null());
        let series = qmem_simulate(cfg);
        assert!(!series.is_null());
        let report = qmem_hysteresis(cfg, series);
        assert!(report.is_null());
        assert!(last_error().contains("insufficient"), "{}", last_error());
        qmem_series_free(series);
        qmem_config_free(cfg);
    }
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(qmem_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

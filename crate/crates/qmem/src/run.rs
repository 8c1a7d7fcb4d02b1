//! Run orchestration: wire a parsed config through the solvers, the loop
//! analysis, and the diagnostics, then emit files.
//!
//! The `--verify` battery re-derives everything that must hold regardless of
//! parameters — operator-identity residual, monotone damping, the damping
//! envelope against |z|, loop pinching, channel current conservation,
//! quantifier-vs-area agreement, g₀·d₀ = 1/2, cross-solver equivalence, and
//! (where the bias offset allows it) the sin²/cos² mirror — and reports every
//! violation rather than stopping at the first.

use crate::analysis::{memory_quantifier, sweep_sqp, HysteresisReport, RATIO_EPS};
use crate::config::RunConfig;
use crate::diagnostics::diagnostics_report;
use crate::dynamics::{
    currents, simulate, CurrentBalance, DriveProtocol, MemductanceForm, ModelKind, SolverSettings,
    TimeSeries,
};
use crate::error::QmemError;
use crate::output::{
    write_hysteresis_svg, write_summary_json, write_sweep_csv, write_timeseries_csv, ScalesSummary,
    Summary,
};
use crate::params::{derive_scales, BathParams, DerivedScales};
use std::fmt::Write as _;
use std::path::Path;

fn has_channel_decomposition(model: ModelKind) -> bool {
    matches!(model, ModelKind::Oracle | ModelKind::Memristor)
}

/// Largest deviation between two equal-length series, normalized by the
/// first series' amplitude.  `None` when the reference is identically zero.
fn max_rel_deviation(a: &[f64], b: &[f64]) -> Option<f64> {
    let scale = a.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if scale < 1e-300 {
        return None;
    }
    let worst = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (&x, &y)| m.max((x - y).abs()));
    Some(worst / scale)
}

/// A run's full yield: the trajectory plus whatever analysis applied to it.
pub struct RunProducts {
    pub ts: TimeSeries,
    /// `None` when the series had no loops; the reason is in `analysis_note`.
    pub analysis: Option<HysteresisReport>,
    pub analysis_note: Option<String>,
    /// Channel currents; present for models that decompose them.
    pub balance: Option<CurrentBalance>,
}

/// Simulate one configuration and run every applicable analysis.
pub fn produce(cfg: &RunConfig) -> Result<RunProducts, QmemError> {
    let ts = simulate(&cfg.system, &cfg.drive, &cfg.init, &cfg.solver)?;
    let (analysis, analysis_note) = match memory_quantifier(&cfg.system, &cfg.drive, &ts) {
        Ok(report) => (Some(report), None),
        Err(QmemError::InsufficientData(msg)) => (None, Some(msg)),
        Err(other) => return Err(other),
    };
    let balance = if has_channel_decomposition(cfg.solver.model) {
        Some(currents(&ts)?)
    } else {
        None
    };
    Ok(RunProducts {
        ts,
        analysis,
        analysis_note,
        balance,
    })
}

/// Every parameter-independent fact the run must satisfy; one line per
/// violation, empty when all hold.
pub fn verify_invariants(
    cfg: &RunConfig,
    scales: &DerivedScales,
    products: &RunProducts,
) -> Vec<String> {
    let mut violations = Vec::new();
    let ts = &products.ts;
    let n = ts.len();

    // Operator identity (⟨φ⟩ − φ_ind) = φ_d.
    if !(ts.max_residual < 1e-6) {
        violations.push(format!(
            "operator-identity residual {:.3e} exceeds 1e-6 rad",
            ts.max_residual
        ));
    }

    // The damping exponent E(τ) = ∫g dτ never decreases (g ≥ 0).
    if ts.damping_exp.windows(2).any(|w| w[1] < w[0] - 1e-15) {
        violations.push("damping exponent is not monotone non-decreasing".into());
    }

    // e^{−E} is the amplitude envelope: |z(τ)| = |z₀|e^{−E(τ)}.
    if has_channel_decomposition(cfg.solver.model) {
        let z0 = ts.v[0].hypot(ts.u[0]);
        let worst = (0..n).fold(0.0f64, |m, j| {
            m.max((ts.v[j].hypot(ts.u[j]) - z0 * (-ts.damping_exp[j]).exp()).abs())
        });
        if !(worst <= 1e-8 * z0.max(1.0)) {
            violations.push(format!("envelope |z| deviates from e^-E by {worst:.3e}"));
        }
    }

    // Pinching: i = (conductance ratio)·v with a bounded ratio, so |i| is
    // zero exactly where v is, and bounded by the ratio's range elsewhere.
    let ratio_bound = match cfg.solver.model {
        ModelKind::NonlinearBaseline => 1.0 + ts.v.iter().fold(0.0f64, |m, &x| m.max(x * x)),
        _ => 2.0,
    } * (1.0 + 1e-12);
    for j in 0..n {
        if ts.v[j] == 0.0 {
            if ts.i[j] != 0.0 {
                violations.push(format!(
                    "current {:.3e} at zero voltage (sample {j})",
                    ts.i[j]
                ));
                break;
            }
        } else if ts.i[j].abs() > ratio_bound * ts.v[j].abs() {
            violations.push(format!(
                "pinching violated at sample {j}: |i| = {:.3e} vs bound {:.3e}",
                ts.i[j].abs(),
                ratio_bound * ts.v[j].abs()
            ));
            break;
        }
    }

    // Channel currents must cancel sample by sample.
    if let Some(balance) = &products.balance {
        if !(balance.max_abs_sum < 1e-5) {
            violations.push(format!(
                "current conservation residual {:.3e} exceeds 1e-5",
                balance.max_abs_sum
            ));
        }
    }

    // The work integral and the shoelace area are the same number.
    if let Some(report) = &products.analysis {
        for (k, (&nk, &ak)) in report
            .quantifiers
            .iter()
            .zip(&report.loop_areas)
            .enumerate()
        {
            let rel = (nk.abs() - ak).abs() / ak.max(RATIO_EPS);
            if ak > 1e-10 && !(rel < 0.005) {
                violations.push(format!(
                    "loop {}: quantifier {:.6e} vs area {:.6e} (rel {rel:.3e})",
                    k + 1,
                    nk.abs(),
                    ak
                ));
            }
        }
    }

    // Zero-point geometry: g₀·d₀ = 1/2 exactly.
    if (scales.g0 * scales.d0 - 0.5).abs() > 1e-12 {
        violations.push(format!("g0*d0 = {:.15} is not 1/2", scales.g0 * scales.d0));
    }

    // Cross-solver equivalence on this very configuration.
    if has_channel_decomposition(cfg.solver.model) {
        let other = match cfg.solver.model {
            ModelKind::Oracle => ModelKind::Memristor,
            _ => ModelKind::Oracle,
        };
        let settings = SolverSettings {
            model: other,
            ..cfg.solver
        };
        match simulate(&cfg.system, &cfg.drive, &cfg.init, &settings) {
            Err(e) => violations.push(format!("cross-solver run failed: {e}")),
            Ok(twin) => {
                for (name, a, b) in [
                    ("v", &ts.v, &twin.v),
                    ("i", &ts.i, &twin.i),
                    ("phi_ind", &ts.phi_ind, &twin.phi_ind),
                ] {
                    if let Some(rel) = max_rel_deviation(a, b) {
                        if !(rel < 1e-6) {
                            violations.push(format!(
                                "solver disagreement on {name}: rel {rel:.3e} vs 1e-6"
                            ));
                        }
                    }
                }
            }
        }
    }

    // Mirror property: with cos φ₀ = 0, flipping the drive sign turns the
    // sin² memductance into the cos² one, so quantifier ratios must agree.
    let mirror_applies = cfg.system.phi0.cos().abs() < 1e-12
        && cfg.drive.amplitude != 0.0
        && has_channel_decomposition(cfg.solver.model)
        && products.analysis.is_some();
    if mirror_applies {
        match mirror_ratios(cfg) {
            Err(e) => violations.push(format!("mirror runs failed: {e}")),
            Ok((rs, rc)) => {
                if rs.len() != rc.len() {
                    violations.push(format!(
                        "mirror loop counts differ: {} vs {}",
                        rs.len(),
                        rc.len()
                    ));
                } else {
                    for (k, (a, b)) in rs.iter().zip(&rc).enumerate() {
                        let rel = (a - b).abs() / a.abs().max(RATIO_EPS);
                        if !(rel < 1e-6) {
                            violations.push(format!(
                                "mirror ratio {} differs: {a:.9} vs {b:.9} (rel {rel:.3e})",
                                k + 1
                            ));
                            break;
                        }
                    }
                }
            }
        }
    }

    violations
}

/// Quantifier ratios for (sin², +a) and (cos², −a) on otherwise identical
/// configurations.
fn mirror_ratios(cfg: &RunConfig) -> Result<(Vec<f64>, Vec<f64>), QmemError> {
    let mut out = Vec::new();
    for (form, sign) in [(MemductanceForm::Sin2, 1.0), (MemductanceForm::Cos2, -1.0)] {
        let drive = DriveProtocol {
            amplitude: sign * cfg.drive.amplitude,
            ..cfg.drive
        };
        let settings = SolverSettings {
            memductance_form: form,
            ..cfg.solver
        };
        let ts = simulate(&cfg.system, &drive, &cfg.init, &settings)?;
        out.push(memory_quantifier(&cfg.system, &drive, &ts)?.ratios);
    }
    let rc = out.pop().expect("two runs");
    let rs = out.pop().expect("two runs");
    Ok((rs, rc))
}

fn ensure_dir(dir: &Path) -> Result<(), QmemError> {
    std::fs::create_dir_all(dir).map_err(|e| QmemError::FileAccess {
        path: dir.display().to_string(),
        source: e,
    })
}

fn emit_run_files(
    cfg: &RunConfig,
    scales: &DerivedScales,
    products: &RunProducts,
) -> Result<(), QmemError> {
    let bath = cfg.bath.unwrap_or_else(|| BathParams::default_for(scales));
    let diagnostics = diagnostics_report(&cfg.system, &cfg.drive, &bath, &cfg.solver)?;
    let summary = Summary {
        model: cfg.solver.model.name(),
        memductance_form: cfg.solver.memductance_form.name(),
        scales: ScalesSummary::from_scales(scales),
        max_residual: products.ts.max_residual,
        conservation_max_abs_sum: Summary::conservation_from(products.balance.as_ref()),
        analysis: products.analysis.clone(),
        analysis_note: products.analysis_note.clone(),
        diagnostics,
    };
    ensure_dir(&cfg.output_dir)?;
    write_timeseries_csv(&cfg.output_dir.join("timeseries.csv"), &products.ts)?;
    write_summary_json(&cfg.output_dir.join("summary.json"), &summary)?;
    if cfg.emit_svg {
        write_hysteresis_svg(&cfg.output_dir.join("hysteresis.svg"), &products.ts)?;
    }
    Ok(())
}

/// The `simulate` command: run, optionally verify, write files.
pub fn execute_run(cfg: &RunConfig, verify: bool) -> Result<(), QmemError> {
    let scales = derive_scales(&cfg.system)?;
    let products = produce(cfg)?;
    if verify {
        let violations = verify_invariants(cfg, &scales, &products);
        if !violations.is_empty() {
            return Err(QmemError::SelfCheck(violations.join("\n")));
        }
    }
    emit_run_files(cfg, &scales, &products)
}

/// The `sweep` command: the base run's files plus `sweep.csv`.
pub fn execute_sweep(cfg: &RunConfig) -> Result<(), QmemError> {
    let scales = derive_scales(&cfg.system)?;
    let products = produce(cfg)?;
    emit_run_files(cfg, &scales, &products)?;
    let spec = cfg.sweep.clone().unwrap_or_default();
    let rows = sweep_sqp(&cfg.system, &cfg.drive, &cfg.init, &cfg.solver, &spec)?;
    write_sweep_csv(&cfg.output_dir.join("sweep.csv"), &rows)
}

/// The `diagnostics` command: the report as JSON text (no files written).
pub fn execute_diagnostics(cfg: &RunConfig) -> Result<String, QmemError> {
    let scales = derive_scales(&cfg.system)?;
    let bath = cfg.bath.unwrap_or_else(|| BathParams::default_for(&scales));
    let report = diagnostics_report(&cfg.system, &cfg.drive, &bath, &cfg.solver)?;
    crate::output::to_json_string(&report)
}

/// The `compare` command: oracle vs memristor max deviations, as text.
pub fn execute_compare(cfg: &RunConfig) -> Result<String, QmemError> {
    let oracle_settings = SolverSettings {
        model: ModelKind::Oracle,
        ..cfg.solver
    };
    let memristor_settings = SolverSettings {
        model: ModelKind::Memristor,
        ..cfg.solver
    };
    let oracle = simulate(&cfg.system, &cfg.drive, &cfg.init, &oracle_settings)?;
    let memristor = simulate(&cfg.system, &cfg.drive, &cfg.init, &memristor_settings)?;
    let mut text = format!(
        "oracle vs memristor, {} samples (s_qp = {:e}):\n",
        oracle.len(),
        cfg.system.s_qp_ratio
    );
    for (name, a, b) in [
        ("v", &oracle.v, &memristor.v),
        ("i", &oracle.i, &memristor.i),
        ("phi_ind", &oracle.phi_ind, &memristor.phi_ind),
    ] {
        match max_rel_deviation(a, b) {
            Some(rel) => writeln!(text, "  {name:8} max deviation {rel:.3e} of amplitude").unwrap(),
            None => writeln!(text, "  {name:8} identically zero in both solvers").unwrap(),
        }
    }
    Ok(text)
}

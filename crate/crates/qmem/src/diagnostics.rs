//! Validity estimators for the two-level reduction.
//!
//! Three checks gate the regime the solvers assume:
//!
//! * **adiabaticity** — the drive must reshape the potential slowly against
//!   the level spacing, α_rs = |∂_τφ_d|/d₀ ≪ 1;
//! * **frequency pull** — quasiparticles shift ω₁₀ by
//!   δω = −g₀²(g_TΔ/e²)[x_qp√(2Δ/ħω₁₀) − 2π x_qp^A]sin²(φ_d/2),
//!   which must stay ≪ ω₁₀;
//! * **pure dephasing** — its matrix element |A_s^d|² = g₀⁴e^{−g₀²}sin²(φ_d/2)/4
//!   is O(g₀⁴) while relaxation is O(g₀²), so dephasing is negligible except
//!   where relaxation itself closes (φ_d → π).
//!
//! None of these feed back into the dynamics; they are reported so a user can
//! tell whether a parameter set still lives where the model is trustworthy.

use crate::dynamics::{DriveKind, DriveProtocol, SolverSettings};
use crate::error::QmemError;
use crate::params::{derive_scales, BathParams, DerivedScales, SystemParams, E_CHARGE, HBAR};
use crate::specfun::sin_half_element_sq;
use serde::Serialize;
use std::f64::consts::TAU;

/// Instantaneous rate-smallness parameter α_rs(τ) = |∂_τφ_d|/d₀.
pub fn adiabatic_param(p: &SystemParams, d: &DriveProtocol, tau: f64) -> Result<f64, QmemError> {
    d.validate()?;
    let scales = derive_scales(p)?;
    let (_, dphi_d) = d.eval(tau);
    Ok(dphi_d.abs() / scales.d0)
}

/// Worst-case α_rs over the protocol: |a|·(ω_d/ω₁₀)/d₀ for the sinusoid,
/// zero for a constant bias.
pub fn adiabatic_param_max(scales: &DerivedScales, d: &DriveProtocol) -> f64 {
    match d.kind {
        DriveKind::ResonantSinusoid => d.amplitude.abs() * d.frequency_ratio / scales.d0,
        DriveKind::Constant => 0.0,
    }
}

/// Quasiparticle-induced pull on the qubit frequency.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrequencyShift {
    /// δω₁₀,qp in rad/s; negative when the equilibrium density x_qp
    /// dominates over the Andreev-weighted density x_qp^A.
    pub delta_omega: f64,
    /// |δω/ω₁₀| — the two-level reduction needs this ≪ 1.
    pub relative: f64,
}

/// High-frequency-limit frequency shift from quasiparticle tunneling.
pub fn freq_shift(b: &BathParams, scales: &DerivedScales, phi_d: f64) -> FrequencyShift {
    let bracket = b.x_qp * (2.0 * b.gap / (HBAR * scales.omega10)).sqrt() - TAU * b.x_qp_a;
    let sin_half = (0.5 * phi_d).sin();
    let delta_omega = -scales.g0
        * scales.g0
        * (b.g_t * b.gap / (E_CHARGE * E_CHARGE))
        * bracket
        * sin_half
        * sin_half;
    FrequencyShift {
        delta_omega,
        relative: (delta_omega / scales.omega10).abs(),
    }
}

/// Pure-dephasing matrix element |A_s^d|² = g₀⁴e^{−g₀²}sin²(φ_d/2)/4.
pub fn dephasing_strength(g0: f64, phi_d: f64) -> f64 {
    let sin_half = (0.5 * phi_d).sin();
    0.25 * g0.powi(4) * (-g0 * g0).exp() * sin_half * sin_half
}

/// |A_s^d|² / |⟨0|sin(φ̂/2)|1⟩|², the dephasing-to-relaxation strength ratio
/// (both rates share the same spectral-density prefactor, which cancels).
/// `None` where the relaxation element vanishes (φ_d = π): there the ratio
/// diverges and pure dephasing must be judged on its own.
pub fn ratio_dephasing_to_relax(g0: f64, phi_d: f64) -> Result<Option<f64>, QmemError> {
    let cos_half = (0.5 * phi_d).cos();
    if cos_half * cos_half < 1e-30 {
        return Ok(None);
    }
    let relax_element = sin_half_element_sq(g0, 1, 0, phi_d)?;
    Ok(Some(dephasing_strength(g0, phi_d) / relax_element))
}

/// Bundle of all validity estimators for one configuration.
///
/// The bath-sensitive quantities (shift, dephasing, ratio) are evaluated at
/// `phi_d_eval`, the drive phase over the run that maximizes sin²(φ_d/2) —
/// i.e. the worst case the protocol actually visits.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub alpha_max: f64,
    /// Per-sample α_rs(τ) on the run grid.
    pub alpha_series: Vec<f64>,
    /// δω₁₀,qp at `phi_d_eval`, rad/s.
    pub delta_omega_qp: f64,
    /// |δω/ω₁₀| at `phi_d_eval`.
    pub delta_omega_relative: f64,
    /// |A_s^d|² at `phi_d_eval`.
    pub dephasing_strength: f64,
    /// Dephasing/relaxation strength ratio at `phi_d_eval`, `None` where
    /// relaxation closes.
    pub ratio_dephasing_to_relax: Option<f64>,
    /// The φ_d the three bath quantities were evaluated at.
    pub phi_d_eval: f64,
}

/// Evaluate every estimator for one run configuration.
pub fn diagnostics_report(
    p: &SystemParams,
    d: &DriveProtocol,
    b: &BathParams,
    s: &SolverSettings,
) -> Result<DiagnosticsReport, QmemError> {
    p.validate()?;
    d.validate()?;
    b.validate()?;
    s.validate()?;
    let scales = derive_scales(p)?;
    let n = (s.periods as usize) * (s.steps_per_period as usize) + 1;
    let dtau = TAU / s.steps_per_period as f64;

    let mut alpha_series = Vec::with_capacity(n);
    let mut phi_d_eval = d.eval(0.0).0;
    let mut worst = (0.5 * phi_d_eval).sin().powi(2);
    for j in 0..n {
        let tau = j as f64 * dtau;
        let (phi_d, dphi_d) = d.eval(tau);
        alpha_series.push(dphi_d.abs() / scales.d0);
        let weight = (0.5 * phi_d).sin().powi(2);
        if weight > worst {
            worst = weight;
            phi_d_eval = phi_d;
        }
    }

    let shift = freq_shift(b, &scales, phi_d_eval);
    Ok(DiagnosticsReport {
        alpha_max: adiabatic_param_max(&scales, d),
        alpha_series,
        delta_omega_qp: shift.delta_omega,
        delta_omega_relative: shift.relative,
        dephasing_strength: dephasing_strength(scales.g0, phi_d_eval),
        ratio_dephasing_to_relax: ratio_dephasing_to_relax(scales.g0, phi_d_eval)?,
        phi_d_eval,
    })
}

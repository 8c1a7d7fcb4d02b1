//! Hysteresis-loop extraction and the memory quantifier.
//!
//! A "loop" is the stretch of trajectory between two consecutive voltage zero
//! crossings — half a drive period for the resonant protocol, so a 10-period
//! run yields 20 crossings and the 19 loop quantifiers N¹…N¹⁹.  Each loop is
//! measured two independent ways:
//!
//! * geometrically, as the shoelace area of the (v, i) polyline closed
//!   through the origin (the loop is pinched there, so the crossing point is
//!   exactly (0, 0)), and
//! * dynamically, as N^k = ∫ F dτ with F = ½v²·d(G/G₀)/dτ, the work-like
//!   kernel whose memory-variable part F₀ = f·½v²·∂_⟨φ⟩(G/G₀) is reported
//!   alongside the explicit-drive remainder.
//!
//! Green's theorem makes the two agree for closed loops; the cross-check is
//! enforced at 0.5% by the test suite.  Ratios are always taken against a
//! freshly computed classical run on the same grid, never a cached one.

use crate::dynamics::{
    simulate_classical, simulate_memristor, DriveProtocol, InitialConditions, SolverSettings,
    TimeSeries,
};
use crate::error::QmemError;
use crate::params::SystemParams;
use serde::Serialize;

/// Floor for ratio denominators, so runs with a vanishing classical
/// reference (e.g. s = 0) report 0 instead of dividing by zero.
pub const RATIO_EPS: f64 = 1e-12;

/// Voltage zero crossings τ_c, by exact zeros and sign-change interpolation.
///
/// A sample with v = 0.0 exactly is a crossing at its own τ (this covers
/// series endpoints, which are otherwise never crossings); between samples
/// of strictly opposite sign the crossing is placed by linear interpolation.
/// Fewer than two crossings — or a voltage that is identically zero — leaves
/// nothing to build loops from and is an insufficient-data error.
pub fn find_pinch_points(ts: &TimeSeries) -> Result<Vec<f64>, QmemError> {
    if ts.v.iter().all(|&v| v == 0.0) {
        return Err(QmemError::InsufficientData(
            "voltage is identically zero; no loops to analyze".into(),
        ));
    }
    let mut crossings = Vec::new();
    let n = ts.len();
    for j in 0..n {
        if ts.v[j] == 0.0 {
            crossings.push(ts.tau[j]);
        } else if j + 1 < n && ts.v[j] * ts.v[j + 1] < 0.0 {
            let frac = ts.v[j] / (ts.v[j] - ts.v[j + 1]);
            crossings.push(ts.tau[j] + frac * (ts.tau[j + 1] - ts.tau[j]));
        }
    }
    if crossings.len() < 2 {
        return Err(QmemError::InsufficientData(format!(
            "found {} voltage zero crossing(s); at least 2 are needed for loop analysis",
            crossings.len()
        )));
    }
    Ok(crossings)
}

/// Signed shoelace area of the (v, i) polyline between two crossing times,
/// closed through the origin.  Both endpoints of a pinched loop sit at
/// (0, 0), so the closure edges contribute nothing and the polygon is just
/// the recorded samples inside (τ_a, τ_b).
pub fn loop_area_shoelace(ts: &TimeSeries, tau_a: f64, tau_b: f64) -> f64 {
    let j_first = ts.tau.partition_point(|&t| t < tau_a);
    let j_last = ts.tau.partition_point(|&t| t <= tau_b);
    let mut twice_area = 0.0;
    for j in j_first..j_last.saturating_sub(1) {
        twice_area += ts.v[j] * ts.i[j + 1] - ts.v[j + 1] * ts.i[j];
    }
    0.5 * twice_area
}

/// Trapezoid of `f` over [τ_a, τ_b] with partial end cells.  The integrand
/// vanishes at loop boundaries (it always carries a v² factor), so the
/// off-grid ends contribute half-trapezoids against an exact zero.
fn integrate_between(ts: &TimeSeries, f: &[f64], tau_a: f64, tau_b: f64) -> f64 {
    let h = ts.dtau();
    let j_first = ts.tau.partition_point(|&t| t < tau_a);
    let j_last = ts.tau.partition_point(|&t| t <= tau_b).saturating_sub(1);
    if j_first > j_last {
        return 0.0;
    }
    let mut total = 0.0;
    for j in j_first..j_last {
        total += 0.5 * h * (f[j] + f[j + 1]);
    }
    total += 0.5 * f[j_first] * (ts.tau[j_first] - tau_a);
    total += 0.5 * f[j_last] * (tau_b - ts.tau[j_last]);
    total
}

/// Per-loop areas, quantifiers, and ratios against the classical reference.
#[derive(Debug, Clone, Serialize)]
pub struct HysteresisReport {
    /// Voltage zero crossings τ_c^k.
    pub crossings: Vec<f64>,
    /// |A_k|: unsigned shoelace area of each loop, (G₀V₀·V₀) units.
    pub loop_areas: Vec<f64>,
    /// Signed quantifiers N^k = ∫ F dτ; consecutive loops alternate sign.
    pub quantifiers: Vec<f64>,
    /// Memory-variable part of each N^k (the f·∂_⟨φ⟩ share).
    pub memory_parts: Vec<f64>,
    /// Explicit-drive remainder, N^k minus the memory part.
    pub explicit_parts: Vec<f64>,
    /// |N_cl| of the first classical loop, from a companion run with
    /// matched parameters and grid.
    pub classical_ref: f64,
    /// |N^k| / max(classical_ref, ε) — the figure-of-merit sequence.
    pub ratios: Vec<f64>,
}

/// Recover grid settings from a recorded series (for companion runs).
fn settings_of(ts: &TimeSeries) -> SolverSettings {
    let spp = (std::f64::consts::TAU / ts.dtau()).round() as u32;
    SolverSettings {
        periods: ((ts.len() - 1) as u32) / spp,
        steps_per_period: spp,
        memductance_form: ts.form,
        model: ts.model,
    }
}

/// Loop-by-loop memory quantification of a trajectory.
///
/// `p` and `d` must be the parameters the series was produced with; they are
/// needed because the classical reference N_cl is recomputed here on the
/// identical grid (blue preset, same drive, same memductance form) rather
/// than cached.  Ratios are reported as |N^k|/|N_cl|, the positive sequence
/// the loop-decay figures quote.
pub fn memory_quantifier(
    p: &SystemParams,
    d: &DriveProtocol,
    ts: &TimeSeries,
) -> Result<HysteresisReport, QmemError> {
    let crossings = find_pinch_points(ts)?;
    let f_total: Vec<f64> = (0..ts.len())
        .map(|j| 0.5 * ts.v[j] * ts.v[j] * ts.dgt[j])
        .collect();
    let f_memory: Vec<f64> = (0..ts.len())
        .map(|j| 0.5 * ts.v[j] * ts.v[j] * ts.dgm[j])
        .collect();

    let n_loops = crossings.len() - 1;
    let mut loop_areas = Vec::with_capacity(n_loops);
    let mut quantifiers = Vec::with_capacity(n_loops);
    let mut memory_parts = Vec::with_capacity(n_loops);
    for w in crossings.windows(2) {
        let (a, b) = (w[0], w[1]);
        loop_areas.push(loop_area_shoelace(ts, a, b).abs());
        quantifiers.push(integrate_between(ts, &f_total, a, b));
        memory_parts.push(integrate_between(ts, &f_memory, a, b));
    }
    let explicit_parts: Vec<f64> = quantifiers
        .iter()
        .zip(&memory_parts)
        .map(|(t, m)| t - m)
        .collect();

    let classical = simulate_classical(p, d, &InitialConditions::blue(), &settings_of(ts))?;
    let cl_crossings = find_pinch_points(&classical)?;
    let cl_f: Vec<f64> = (0..classical.len())
        .map(|j| 0.5 * classical.v[j] * classical.v[j] * classical.dgt[j])
        .collect();
    let classical_ref =
        integrate_between(&classical, &cl_f, cl_crossings[0], cl_crossings[1]).abs();

    let denom = classical_ref.max(RATIO_EPS);
    let ratios: Vec<f64> = quantifiers.iter().map(|n| n.abs() / denom).collect();
    Ok(HysteresisReport {
        crossings,
        loop_areas,
        quantifiers,
        memory_parts,
        explicit_parts,
        classical_ref,
        ratios,
    })
}

/// Sweep plan over bath spectral densities.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    /// log₁₀ of s = S_qp(ω₁₀)/ω₁₀ for each run, ascending.
    pub log10_s_values: Vec<f64>,
    pub periods: u32,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            log10_s_values: (0..9).map(|k| -4.0 + 0.5 * k as f64).collect(),
            periods: 10,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), QmemError> {
        if self.log10_s_values.is_empty() {
            return Err(QmemError::ParamDomain(
                "sweep needs at least one s value".into(),
            ));
        }
        if self.log10_s_values.iter().any(|x| !x.is_finite()) {
            return Err(QmemError::ParamDomain("sweep values must be finite".into()));
        }
        if self.log10_s_values.windows(2).any(|w| w[0] > w[1]) {
            return Err(QmemError::ParamDomain(
                "sweep values must be ascending".into(),
            ));
        }
        Ok(())
    }
}

/// One sweep point: decay of the current and voltage amplitudes after the
/// run, both ∈ (0, 1] for a dissipative bath.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub log10_s: f64,
    /// max|i| over the last drive period / max|i| over the first.
    pub i_ratio: f64,
    /// Damping-envelope ratio e^{−E(end)} — the voltage amplitude retained.
    pub v_ratio: f64,
}

/// Memristor-model runs across bath strengths; the drive, preset, grid and
/// memductance form are held fixed while s = 10^log10_s varies.
pub fn sweep_sqp(
    p: &SystemParams,
    d: &DriveProtocol,
    ic: &InitialConditions,
    s: &SolverSettings,
    spec: &SweepSpec,
) -> Result<Vec<SweepRow>, QmemError> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.log10_s_values.len());
    for &log10_s in &spec.log10_s_values {
        let p_k = SystemParams {
            s_qp_ratio: 10f64.powf(log10_s),
            ..*p
        };
        let s_k = SolverSettings {
            periods: spec.periods,
            ..*s
        };
        let ts = simulate_memristor(&p_k, d, ic, &s_k)?;
        let spp = s_k.steps_per_period as usize;
        let n = ts.len();
        let peak =
            |range: std::ops::Range<usize>| ts.i[range].iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let first = peak(0..spp + 1);
        let last = peak(n - spp - 1..n);
        rows.push(SweepRow {
            log10_s,
            i_ratio: last / first.max(1e-300),
            v_ratio: (-ts.damping_exp[n - 1]).exp(),
        });
    }
    Ok(rows)
}

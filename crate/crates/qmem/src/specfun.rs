//! Oscillator matrix elements of the junction phase operator.
//!
//! The dc SQUID phase enters the quasiparticle tunneling rate through
//! sin(φ̂/2), where φ̂ = 2g₀(â + â†) + φ_d.  Writing sin(φ̂/2) in terms of
//! displacement operators D(±ig₀) reduces every matrix element to an
//! associated Laguerre polynomial, a factorial ratio and a parity factor:
//!
//!   |⟨m|sin(φ̂/2)|n⟩|² = P(g₀,n,m) · [1 + (−1)^{1+|n−m|} cos φ_d] / 2
//!   P(g₀,n,m)         = e^{−g₀²} (min!/max!) g₀^{2|n−m|} [L_min^{|n−m|}(g₀²)]²
//!
//! with min/max the smaller/larger of (n, m).  Everything in this module is
//! a pure function of its arguments; no state, no units beyond radians.

use crate::error::QmemError;
use num_complex::Complex64;

/// Transitions are capped here so factorial ratios stay representable.
pub const MAX_LEVEL: u32 = 64;

/// Associated Laguerre polynomial L_n^k(x).
///
/// Upward three-term recurrence in the degree at fixed superscript:
///
///   (n+1) L_{n+1}^k(x) = (2n + k + 1 − x) L_n^k(x) − (n + k) L_{n−1}^k(x)
///
/// starting from L_0^k = 1 and L_1^k = 1 + k − x.  Stable for the small
/// arguments used here (x = g₀², typically ≪ 1) and exact for polynomial
/// data, so no special casing is needed.
pub fn laguerre_assoc(n: u32, k: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let kf = k as f64;
    let mut prev = 1.0;
    let mut curr = 1.0 + kf - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + kf + 1.0 - x) * curr - (jf + kf) * prev) / (jf + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// ln(n!) by direct summation; exact enough (few ulp) for n ≤ MAX_LEVEL.
fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

fn check_g0(g0: f64) -> Result<(), QmemError> {
    if !g0.is_finite() || g0 < 0.0 {
        return Err(QmemError::ParamDomain(format!(
            "zero-point phase spread g0 must be finite and >= 0, got {g0}"
        )));
    }
    Ok(())
}

fn check_levels(n: u32, m: u32) -> Result<(), QmemError> {
    if n > MAX_LEVEL || m > MAX_LEVEL {
        return Err(QmemError::ParamDomain(format!(
            "oscillator levels capped at {MAX_LEVEL} (requested n = {n}, m = {m})"
        )));
    }
    Ok(())
}

/// Phase-independent part P(g₀, n, m) of the sine matrix element.
///
/// Symmetric in (n, m).  The factorial ratio min!/max! is evaluated through
/// log-gamma differences except for small levels, where the exact running
/// product `1/((min+1)···max)` is cheaper and exact.
pub fn p_factor(g0: f64, n: u32, m: u32) -> Result<f64, QmemError> {
    check_g0(g0)?;
    check_levels(n, m)?;
    let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
    let k = hi - lo;
    let x = g0 * g0;
    let lag = laguerre_assoc(lo, k, x);
    let ratio_times_power = if hi <= 20 {
        // min!/max! · g₀^{2k} as one product of small factors
        (lo + 1..=hi).map(|j| x / j as f64).product::<f64>()
    } else {
        (ln_factorial(lo) - ln_factorial(hi) + 2.0 * k as f64 * g0.max(f64::MIN_POSITIVE).ln())
            .exp()
    };
    Ok((-x).exp() * ratio_times_power * lag * lag)
}

/// |⟨m|sin(φ̂/2)|n⟩|² at phase bias φ_d.
///
/// The parity factor follows the transition distance: odd |n−m| carries
/// (1 + cos φ_d)/2, even |n−m| carries (1 − cos φ_d)/2.  Result lies in
/// [0, P(g₀,n,m)].
pub fn sin_half_element_sq(g0: f64, n: u32, m: u32, phi_d: f64) -> Result<f64, QmemError> {
    let p = p_factor(g0, n, m)?;
    let sign = if (n.abs_diff(m)) % 2 == 1 { 1.0 } else { -1.0 };
    Ok(p * (1.0 + sign * phi_d.cos()) / 2.0)
}

/// Displacement operator matrix element ⟨m|D(α)|n⟩ on number states.
///
/// For m ≤ n:  e^{−|α|²/2} √(m!/n!) (−α*)^{n−m} L_m^{n−m}(|α|²),
/// for m ≥ n:  e^{−|α|²/2} √(n!/m!)  α^{m−n}  L_n^{m−n}(|α|²).
///
/// Magnitude assembled in log space, phase carried by a unit complex power,
/// so nothing overflows on the way to a representable answer.
pub fn displacement_element(alpha: Complex64, n: u32, m: u32) -> Result<Complex64, QmemError> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(QmemError::ParamDomain(format!(
            "displacement amplitude must be finite, got {alpha}"
        )));
    }
    check_levels(n, m)?;
    let (lo, hi) = if m <= n { (m, n) } else { (n, m) };
    let k = hi - lo;
    let r2 = alpha.norm_sqr();
    let lag = laguerre_assoc(lo, k, r2);
    if k == 0 {
        return Ok(Complex64::new((-r2 / 2.0).exp() * lag, 0.0));
    }
    let r = r2.sqrt();
    if r == 0.0 {
        return Ok(Complex64::new(0.0, 0.0)); // off-diagonal element of the identity
    }
    let mag = (0.5 * (ln_factorial(lo) - ln_factorial(hi)) + k as f64 * r.ln() - r2 / 2.0).exp();
    // unit phase of (−α*) when m ≤ n, of α when m > n
    let dir = if m <= n { -alpha.conj() / r } else { alpha / r };
    Ok(dir.powu(k) * mag * lag)
}

/// Quasiparticle decay rate of the first excited state, in units of ω₁₀:
///
///   Γ₁→₀ / ω₁₀ = P(g₀,1,0) · (1 + cos φ_d)/2 · s_qp
///
/// with s_qp the bath spectral density at ω₁₀ in the same units.  The rate
/// vanishes at φ_d = π where destructive interference closes the primary
/// channel; contributions of higher transitions, not modelled here, dominate
/// the physical rate near that point.
pub fn decay_rate(g0: f64, phi_d: f64, s_qp: f64) -> f64 {
    debug_assert!(g0 >= 0.0 && s_qp >= 0.0);
    let x = g0 * g0;
    x * (-x).exp() * (1.0 + phi_d.cos()) / 2.0 * s_qp
}

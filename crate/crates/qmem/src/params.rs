//! Circuit parameters and every constant derived from them.
//!
//! The device is a driven oscillator with Hamiltonian E_C n̂² + (E_L/2)(φ̂ − φ_d)²,
//! so two energies fix everything:
//!
//!   ω₁₀ = √(2 E_C E_L)/ħ      transition frequency
//!   g₀  = [E_C/(32 E_L)]^¼     zero-point spread of φ̂/2
//!   d₀  = [2 E_L/E_C]^¼        zero-point charge spread
//!   C_d = 2e²/E_C              shunt capacitance
//!
//! g₀·d₀ = 1/2 is an algebraic identity and is asserted by tests, not stored.
//! The solver core works in dimensionless units throughout: time τ = ω₁₀t,
//! voltage v = ⟨V⟩/V₀ with V₀ = v₀ħω₁₀/(2e), current i = ⟨I_qp⟩/(G₀V₀),
//! conductance G/G₀, rate Γ/ω₁₀.  SI constants appear only in the bridge
//! functions here.

use crate::error::QmemError;
use crate::specfun;

/// Elementary charge, C (CODATA, exact since the 2019 SI).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant, J·s (exact).
pub const PLANCK_H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK_H / std::f64::consts::TAU;
/// Superconducting flux quantum h/2e, Wb.
pub const FLUX_QUANTUM: f64 = PLANCK_H / (2.0 * E_CHARGE);

/// Primary circuit inputs.  All other constants derive from these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Charging energy as a frequency: E_C/(2πħ) in GHz.
    pub e_c_ghz: f64,
    /// Inductive-to-charging energy ratio E_L/E_C.
    pub e_l_ratio: f64,
    /// Static phase-bias offset φ₀, radians.
    pub phi0: f64,
    /// Drive strength v₀ = 2eV₀/(ħω₁₀); sets the voltage unit V₀.
    pub v0_norm: f64,
    /// Bath spectral density at the transition, s = S_qp(ω₁₀)/ω₁₀.
    pub s_qp_ratio: f64,
}

impl SystemParams {
    pub fn new(
        e_c_ghz: f64,
        e_l_ratio: f64,
        phi0: f64,
        v0_norm: f64,
        s_qp_ratio: f64,
    ) -> Result<Self, QmemError> {
        let p = SystemParams {
            e_c_ghz,
            e_l_ratio,
            phi0,
            v0_norm,
            s_qp_ratio,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), QmemError> {
        let checks = [
            (self.e_c_ghz > 0.0, "e_c_ghz must be > 0", self.e_c_ghz),
            (
                self.e_l_ratio > 0.0,
                "e_l_ratio must be > 0",
                self.e_l_ratio,
            ),
            (self.phi0.is_finite(), "phi0 must be finite", self.phi0),
            (self.v0_norm >= 0.0, "v0_norm must be >= 0", self.v0_norm),
            (
                self.s_qp_ratio >= 0.0,
                "s_qp_ratio must be >= 0",
                self.s_qp_ratio,
            ),
        ];
        for (ok, msg, got) in checks {
            // NaN fails every comparison above, so it is caught here too
            if !ok || !got.is_finite() {
                return Err(QmemError::ParamDomain(format!("{msg} (got {got})")));
            }
        }
        Ok(())
    }
}

impl Default for SystemParams {
    /// The reference configuration: E_C/(2πħ) = 1 GHz, E_L = 10³E_C,
    /// φ₀ = π/2, v₀ = 1, s = 1.
    fn default() -> Self {
        SystemParams {
            e_c_ghz: 1.0,
            e_l_ratio: 1000.0,
            phi0: std::f64::consts::FRAC_PI_2,
            v0_norm: 1.0,
            s_qp_ratio: 1.0,
        }
    }
}

/// Everything the solvers and the SI bridge need, precomputed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// Transition frequency ω₁₀ = √(2 E_C E_L)/ħ, rad/s.
    pub omega10: f64,
    /// Zero-point phase spread g₀ = [E_C/(32 E_L)]^¼.
    pub g0: f64,
    /// Zero-point charge spread d₀ = [2 E_L/E_C]^¼.
    pub d0: f64,
    /// Shunt capacitance C_d = 2e²/E_C, farad.
    pub c_d: f64,
    /// Voltage unit V₀ = v₀ ħω₁₀/(2e), volt.
    pub v0_si: f64,
    /// Conductance unit G₀ = P(g₀,1,0)·S_qp(ω₁₀)·C_d/4, siemens.
    pub g_norm: f64,
    /// Copy of the input v₀.  The inductive phase is φ_ind = v₀·(∂_τv + g·v):
    /// the coefficient 4g₀²C_dV₀/e collapses to exactly v₀, so the solvers
    /// need it at every step.
    pub v0_norm: f64,
    /// Phase-independent factor P(g₀,1,0) of the 0↔1 matrix element;
    /// the dimensionless memductance is (P·s/4)-scaled.
    pub p10: f64,
}

/// Evaluate all derived constants.  Fails on out-of-domain inputs.
pub fn derive_scales(p: &SystemParams) -> Result<DerivedScales, QmemError> {
    p.validate()?;
    let e_c = PLANCK_H * p.e_c_ghz * 1e9; // joule
    let e_l = p.e_l_ratio * e_c;
    let omega10 = (2.0 * e_c * e_l).sqrt() / HBAR;
    let g0 = (1.0 / (32.0 * p.e_l_ratio)).powf(0.25);
    let d0 = (2.0 * p.e_l_ratio).powf(0.25);
    let c_d = 2.0 * E_CHARGE * E_CHARGE / e_c;
    let v0_si = p.v0_norm * HBAR * omega10 / (2.0 * E_CHARGE);
    let p10 = specfun::p_factor(g0, 1, 0)?;
    let g_norm = p10 * (p.s_qp_ratio * omega10) * c_d / 4.0;
    Ok(DerivedScales {
        omega10,
        g0,
        d0,
        c_d,
        v0_si,
        g_norm,
        v0_norm: p.v0_norm,
        p10,
    })
}

/// Dimensionless quantities the SI bridge can convert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiQuantity {
    /// τ → seconds (divide by ω₁₀).
    Time,
    /// v → volt (multiply by V₀).
    Voltage,
    /// i → ampere (multiply by G₀V₀).
    Current,
    /// G/G₀ → siemens (multiply by G₀).
    Conductance,
    /// Γ/ω₁₀ → rad/s (multiply by ω₁₀).
    Rate,
}

/// Convert one normalized value to SI units.
///
/// Note the voltage scale is V₀ = v₀ħω₁₀/(2e), not bare ħω₁₀/(2e): the
/// normalization is v = ⟨V⟩/V₀, and the two coincide only at v₀ = 1.
pub fn to_si(d: &DerivedScales, quantity: SiQuantity, normalized: f64) -> f64 {
    match quantity {
        SiQuantity::Time => normalized / d.omega10,
        SiQuantity::Voltage => normalized * d.v0_si,
        SiQuantity::Current => normalized * d.g_norm * d.v0_si,
        SiQuantity::Conductance => normalized * d.g_norm,
        SiQuantity::Rate => normalized * d.omega10,
    }
}

/// Quasiparticle bath description for the diagnostic estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Effective superconducting gap Δ (≈ Δ₁ of the dominant junction), joule.
    pub gap: f64,
    /// Quasiparticle density normalized to the Cooper-pair density.
    pub x_qp: f64,
    /// Quasiparticle occupation at the gap edge, x_qp^A ∈ [0, 1].
    pub x_qp_a: f64,
    /// Effective junction normal-state conductance g_T, siemens.
    pub g_t: f64,
}

impl BathParams {
    pub fn new(gap: f64, x_qp: f64, x_qp_a: f64, g_t: f64) -> Result<Self, QmemError> {
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(QmemError::ParamDomain(format!(
                "gap must be > 0 (got {gap})"
            )));
        }
        if !(x_qp >= 0.0 && x_qp.is_finite()) {
            return Err(QmemError::ParamDomain(format!(
                "x_qp must be >= 0 (got {x_qp})"
            )));
        }
        if !(0.0..=1.0).contains(&x_qp_a) {
            return Err(QmemError::ParamDomain(format!(
                "x_qp_a must lie in [0, 1] (got {x_qp_a})"
            )));
        }
        if !(g_t >= 0.0 && g_t.is_finite()) {
            return Err(QmemError::ParamDomain(format!(
                "g_t must be >= 0 (got {g_t})"
            )));
        }
        Ok(BathParams {
            gap,
            x_qp,
            x_qp_a,
            g_t,
        })
    }

    /// Defaults used when a config gives no bath section: Δ = 10·ħω₁₀,
    /// x_qp = 10⁻⁶, x_qp^A = 0, g_T = 1 µS.
    pub fn default_for(scales: &DerivedScales) -> Self {
        BathParams {
            gap: 10.0 * HBAR * scales.omega10,
            x_qp: 1e-6,
            x_qp_a: 0.0,
            g_t: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<(), QmemError> {
        Self::new(self.gap, self.x_qp, self.x_qp_a, self.g_t).map(|_| ())
    }
}

/// The two junctions of the conductance-asymmetric SQUID.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionPair {
    /// Junction conductances, siemens.
    pub g1: f64,
    pub g2: f64,
    /// Junction gaps, joule.
    pub delta1: f64,
    pub delta2: f64,
}

impl JunctionPair {
    pub fn new(g1: f64, g2: f64, delta1: f64, delta2: f64) -> Result<Self, QmemError> {
        for (name, x) in [
            ("g1", g1),
            ("g2", g2),
            ("delta1", delta1),
            ("delta2", delta2),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(QmemError::ParamDomain(format!(
                    "{name} must be > 0 (got {x})"
                )));
            }
        }
        Ok(JunctionPair {
            g1,
            g2,
            delta1,
            delta2,
        })
    }
}

/// Combined leakage of the junction pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveJunction {
    /// G_eff = G₁ + G₂, siemens.
    pub g_eff: f64,
    /// Conductance asymmetry S_asym = (G₁ − G₂)/(G₁ + G₂), in (−1, 1).
    pub s_asym: f64,
    /// Whether G₁/G₂ = Δ₂/Δ₁ holds within the relative tolerance, i.e. the
    /// pair is consistent with the Ambegaokar–Baratoff relation at equal
    /// critical currents.
    pub ab_consistent: bool,
}

/// Effective-junction quantities with the default 10⁻⁶ consistency tolerance.
pub fn effective_junction(j: &JunctionPair) -> Result<EffectiveJunction, QmemError> {
    effective_junction_with_tol(j, 1e-6)
}

pub fn effective_junction_with_tol(
    j: &JunctionPair,
    rel_tol: f64,
) -> Result<EffectiveJunction, QmemError> {
    let total = j.g1 + j.g2;
    if total == 0.0 {
        return Err(QmemError::ParamDomain(
            "junction pair has zero total conductance; asymmetry is undefined".into(),
        ));
    }
    // G₁/G₂ = Δ₂/Δ₁  ⇔  G₁Δ₁ = G₂Δ₂, compared without divisions
    let lhs = j.g1 * j.delta1;
    let rhs = j.g2 * j.delta2;
    let ab_consistent = (lhs - rhs).abs() <= rel_tol * lhs.max(rhs);
    Ok(EffectiveJunction {
        g_eff: total,
        s_asym: (j.g1 - j.g2) / total,
        ab_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reference_transition_frequency() {
        let scales = derive_scales(&SystemParams::default()).unwrap();
        let f10_ghz = scales.omega10 / (2.0 * PI) / 1e9;
        // √(2·1·1000) GHz = √2000 GHz, six significant digits
        assert!(
            (f10_ghz - 44.7213595499958).abs() < 5e-5,
            "f10 = {f10_ghz} GHz, want 44.7214 GHz"
        );
    }

    #[test]
    fn reference_zero_point_spreads() {
        let scales = derive_scales(&SystemParams::default()).unwrap();
        assert!((scales.g0 - 0.0747674).abs() < 5e-8, "g0 = {}", scales.g0);
        assert!((scales.d0 - 6.68740).abs() < 5e-6, "d0 = {}", scales.d0);
        assert!((scales.g0 * scales.d0 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn quartic_roots_of_small_ratio() {
        // E_L = E_C/2 puts both quartic roots at nice values
        let p = SystemParams::new(1.0, 0.5, 0.0, 1.0, 0.0).unwrap();
        let scales = derive_scales(&p).unwrap();
        assert!((scales.d0 - 1.0).abs() < 1e-15);
        assert!((scales.g0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reference_si_values() {
        let scales = derive_scales(&SystemParams::default()).unwrap();
        // C_d = 2e²/E_C with E_C = h·1 GHz
        let c_d_expect = 2.0 * E_CHARGE * E_CHARGE / (PLANCK_H * 1e9);
        assert!((scales.c_d - c_d_expect).abs() < 1e-28);
        assert!(
            (scales.c_d - 7.748e-14).abs() < 1e-17,
            "c_d = {}",
            scales.c_d
        );
        // V₀ ≈ 92.5 µV at v₀ = 1
        assert!(
            (scales.v0_si - 9.2477e-5).abs() < 1e-9,
            "v0 = {}",
            scales.v0_si
        );
        // G₀ ≈ 30 µS at s = 1
        let g0_expect = scales.p10 * scales.omega10 * scales.c_d / 4.0;
        assert!((scales.g_norm - g0_expect).abs() < 1e-18);
        assert!(
            (scales.g_norm - 3.026e-5).abs() < 1e-8,
            "G0 = {}",
            scales.g_norm
        );
    }

    #[test]
    fn si_bridge_round_numbers() {
        let scales = derive_scales(&SystemParams::default()).unwrap();
        // one drive period: 2π/ω₁₀ ≈ 22.36 ps
        let period = to_si(&scales, SiQuantity::Time, 2.0 * PI);
        assert!((period - 22.36e-12).abs() < 5e-15, "T = {period}");
        assert_eq!(to_si(&scales, SiQuantity::Voltage, 0.0), 0.0);
        assert!((to_si(&scales, SiQuantity::Voltage, 1.0) - scales.v0_si).abs() < 1e-20);
        assert!(
            (to_si(&scales, SiQuantity::Rate, 1.0) - scales.omega10).abs() < 1e-6 * scales.omega10
        );
        let i_unit = to_si(&scales, SiQuantity::Current, 1.0);
        assert!((i_unit - scales.g_norm * scales.v0_si).abs() < 1e-20);
    }

    #[test]
    fn scale_consistency_under_common_factor() {
        let base = derive_scales(&SystemParams::default()).unwrap();
        for lambda in [0.5, 2.0, 7.0] {
            let p = SystemParams::new(lambda, 1000.0, PI / 2.0, 1.0, 1.0).unwrap();
            let s = derive_scales(&p).unwrap();
            assert!((s.omega10 / base.omega10 - lambda).abs() < 1e-12 * lambda);
            assert_eq!(s.g0, base.g0);
            assert_eq!(s.d0, base.d0);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SystemParams::new(0.0, 1000.0, 0.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, -1.0, 0.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1000.0, f64::NAN, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1000.0, 0.0, -0.1, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1000.0, 0.0, 1.0, -1e-9).is_err());
        assert!(BathParams::new(1e-23, 0.0, 1.5, 1e-6).is_err());
        assert!(JunctionPair::new(1e-6, 0.0, 1e-23, 1e-23).is_err());
    }

    #[test]
    fn zero_bath_zeroes_only_the_conductance_unit() {
        let p = SystemParams::new(1.0, 1000.0, PI / 2.0, 1.0, 0.0).unwrap();
        let s = derive_scales(&p).unwrap();
        assert_eq!(s.g_norm, 0.0);
        assert!(s.omega10 > 0.0 && s.v0_si > 0.0 && s.c_d > 0.0);
    }

    #[test]
    fn junction_pair_combinations() {
        let sym = JunctionPair::new(1e-6, 1e-6, 3e-23, 3e-23).unwrap();
        let e = effective_junction(&sym).unwrap();
        assert!((e.g_eff - 2e-6).abs() < 1e-20);
        assert_eq!(e.s_asym, 0.0);
        assert!(e.ab_consistent);

        let skew = JunctionPair::new(99e-6, 1e-6, 3e-23, 3e-23).unwrap();
        let e = effective_junction(&skew).unwrap();
        assert!((e.g_eff - 100e-6).abs() < 1e-18);
        assert!((e.s_asym - 0.98).abs() < 1e-12);
        assert!(
            !e.ab_consistent,
            "equal gaps cannot balance a 99:1 conductance ratio"
        );

        // G₁/G₂ = 100 with Δ₂/Δ₁ = 100 satisfies G₁Δ₁ = G₂Δ₂
        let ab = JunctionPair::new(100e-6, 1e-6, 1e-23, 100e-23).unwrap();
        assert!(effective_junction(&ab).unwrap().ab_consistent);
    }

    #[test]
    fn bath_defaults_track_the_gap() {
        let scales = derive_scales(&SystemParams::default()).unwrap();
        let bath = BathParams::default_for(&scales);
        assert!((bath.gap / (HBAR * scales.omega10) - 10.0).abs() < 1e-12);
        assert_eq!(bath.x_qp_a, 0.0);
    }
}

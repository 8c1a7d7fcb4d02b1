//! Simulation of a phase-biased superconducting memristor.
//!
//! A driven rf-SQUID-like mode decays through quasiparticle tunneling in a
//! conductance-asymmetric dc SQUID; the tunneling conductance depends on the
//! device's own phase history, which makes the element memristive.  The crate
//! derives the circuit scales, integrates the coherence dynamics, extracts
//! pinched hysteresis loops and their memory quantifiers, and evaluates the
//! validity estimators (adiabaticity, quasiparticle frequency shift, pure
//! dephasing) that bound the model's applicability.

pub mod analysis;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod output;
pub mod params;
pub mod run;
pub mod specfun;

pub use config::{parse_config, RunConfig};
pub use diagnostics::{diagnostics_report, DiagnosticsReport};
pub use run::{execute_compare, execute_diagnostics, execute_run, execute_sweep};

pub use analysis::{
    find_pinch_points, loop_area_shoelace, memory_quantifier, sweep_sqp, HysteresisReport,
    SweepRow, SweepSpec,
};

pub use dynamics::{
    simulate, simulate_classical, simulate_memristor, simulate_nonlinear_baseline, simulate_oracle,
    DriveProtocol, InitialConditions, MemductanceForm, ModelKind, SolverSettings, TimeSeries,
};
pub use error::QmemError;
pub use params::{derive_scales, DerivedScales, SystemParams};

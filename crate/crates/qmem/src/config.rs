//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Unknown and duplicate keys are rejected, and every diagnostic carries the
//! 1-based line it points at.  An empty file is a complete configuration:
//! the defaults reproduce the reference run (1 GHz charging energy, energy
//! ratio 10³, φ₀ = π/2, resonant drive of unit amplitude, blue start,
//! 10 × 2000-step grid, sin² memductance, memristor model).
//!
//! ```text
//! e_c_ghz   = 1
//! e_l_ratio = 1000
//! preset    = blue        # or red | black | custom (+ v_init/u_init)
//! periods   = 10
//! ```
//!
//! The drive amplitude defaults to `v0_norm`, matching the regime where the
//! drive phase and the voltage unit come from the same source; give
//! `drive_amplitude` explicitly (it may be negative) to decouple them.

use crate::analysis::SweepSpec;
use crate::dynamics::{
    DriveKind, DriveProtocol, InitialConditions, MemductanceForm, ModelKind, Preset, SolverSettings,
};
use crate::error::QmemError;
use crate::params::{derive_scales, BathParams, SystemParams};
use std::collections::HashMap;
use std::path::PathBuf;

/// Everything one run needs, fully validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: SystemParams,
    /// The drive shares φ₀ with `system`; `parse_config` keeps them equal.
    pub drive: DriveProtocol,
    pub init: InitialConditions,
    pub solver: SolverSettings,
    /// Present only when a bath key was given; callers fall back to
    /// [`BathParams::default_for`] otherwise.
    pub bath: Option<BathParams>,
    /// Present only when a sweep key was given.
    pub sweep: Option<SweepSpec>,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemParams::default(),
            drive: DriveProtocol::default(),
            init: InitialConditions::blue(),
            solver: SolverSettings::default(),
            bath: None,
            sweep: None,
            output_dir: PathBuf::from("."),
            emit_svg: false,
        }
    }
}

const KEYS: &[&str] = &[
    "e_c_ghz",
    "e_l_ratio",
    "phi0",
    "v0_norm",
    "s_qp_ratio",
    "drive",
    "drive_amplitude",
    "frequency_ratio",
    "preset",
    "v_init",
    "u_init",
    "periods",
    "steps_per_period",
    "memductance_form",
    "model",
    "gap_ghz",
    "x_qp",
    "x_qp_a",
    "g_t_us",
    "sweep_log10_s",
    "sweep_periods",
    "output_dir",
    "emit_svg",
];

fn err(line: usize, message: impl Into<String>) -> QmemError {
    QmemError::Config {
        line,
        message: message.into(),
    }
}

struct Entries<'a> {
    values: HashMap<&'a str, (&'a str, usize)>,
}

impl<'a> Entries<'a> {
    fn collect(text: &'a str) -> Result<Self, QmemError> {
        let mut values = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(err(
                    line,
                    format!("expected `key = value`, got `{content}`"),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(line, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(err(line, format!("missing value for `{key}`")));
            }
            if let Some(&(_, first)) = values.get(key) {
                return Err(err(
                    line,
                    format!("duplicate key `{key}` (already set on line {first})"),
                ));
            }
            values.insert(key, (value, line));
        }
        Ok(Entries { values })
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.values.get(key).map(|&(_, line)| line)
    }

    fn take<T>(
        &self,
        key: &str,
        parse: impl Fn(&str, usize) -> Result<T, QmemError>,
    ) -> Result<Option<(T, usize)>, QmemError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(&(value, line)) => Ok(Some((parse(value, line)?, line))),
        }
    }
}

fn parse_f64(key: &str) -> impl Fn(&str, usize) -> Result<f64, QmemError> + '_ {
    move |value, line| {
        value.parse::<f64>().map_err(|_| {
            err(
                line,
                format!("invalid value for `{key}`: `{value}` is not a number"),
            )
        })
    }
}

fn parse_u32(key: &str) -> impl Fn(&str, usize) -> Result<u32, QmemError> + '_ {
    move |value, line| {
        value.parse::<u32>().map_err(|_| {
            err(
                line,
                format!("invalid value for `{key}`: `{value}` is not a whole number"),
            )
        })
    }
}

fn parse_bool(key: &str) -> impl Fn(&str, usize) -> Result<bool, QmemError> + '_ {
    move |value, line| match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(err(
            line,
            format!("invalid value for `{key}`: expected true|false, got `{value}`"),
        )),
    }
}

/// Range-check a parsed number right at its key, so the error cites the line.
fn check(
    entry: Option<(f64, usize)>,
    key: &str,
    ok: impl Fn(f64) -> bool,
    requirement: &str,
) -> Result<Option<f64>, QmemError> {
    match entry {
        None => Ok(None),
        Some((x, line)) => {
            if x.is_finite() && ok(x) {
                Ok(Some(x))
            } else {
                Err(err(
                    line,
                    format!("`{key}` must be {requirement} (got {x})"),
                ))
            }
        }
    }
}

/// Parse and validate a configuration file's text.
pub fn parse_config(text: &str) -> Result<RunConfig, QmemError> {
    let entries = Entries::collect(text)?;
    let defaults = RunConfig::default();

    // --- circuit parameters -------------------------------------------------
    let mut system = defaults.system;
    if let Some(x) = check(
        entries.take("e_c_ghz", parse_f64("e_c_ghz"))?,
        "e_c_ghz",
        |x| x > 0.0,
        "> 0",
    )? {
        system.e_c_ghz = x;
    }
    if let Some(x) = check(
        entries.take("e_l_ratio", parse_f64("e_l_ratio"))?,
        "e_l_ratio",
        |x| x > 0.0,
        "> 0",
    )? {
        system.e_l_ratio = x;
    }
    if let Some(x) = check(
        entries.take("phi0", parse_f64("phi0"))?,
        "phi0",
        |_| true,
        "finite",
    )? {
        system.phi0 = x;
    }
    if let Some(x) = check(
        entries.take("v0_norm", parse_f64("v0_norm"))?,
        "v0_norm",
        |x| x >= 0.0,
        ">= 0",
    )? {
        system.v0_norm = x;
    }
    if let Some(x) = check(
        entries.take("s_qp_ratio", parse_f64("s_qp_ratio"))?,
        "s_qp_ratio",
        |x| x >= 0.0,
        ">= 0",
    )? {
        system.s_qp_ratio = x;
    }

    // --- drive protocol ------------------------------------------------------
    let kind = match entries.take("drive", |v, l| Ok((v.to_string(), l)))? {
        None => DriveKind::ResonantSinusoid,
        Some(((v, line), _)) => match v.as_str() {
            "resonant_sinusoid" => DriveKind::ResonantSinusoid,
            "constant" => DriveKind::Constant,
            other => return Err(err(
                line,
                format!(
                    "invalid value for `drive`: expected resonant_sinusoid|constant, got `{other}`"
                ),
            )),
        },
    };
    let amplitude = check(
        entries.take("drive_amplitude", parse_f64("drive_amplitude"))?,
        "drive_amplitude",
        |_| true,
        "finite",
    )?;
    let frequency_ratio = check(
        entries.take("frequency_ratio", parse_f64("frequency_ratio"))?,
        "frequency_ratio",
        |x| x > 0.0,
        "> 0",
    )?;
    if kind == DriveKind::Constant {
        for key in ["drive_amplitude", "frequency_ratio"] {
            if let Some(line) = entries.line_of(key) {
                return Err(err(
                    line,
                    format!("`{key}` has no effect for drive = constant"),
                ));
            }
        }
    }
    let drive = match kind {
        DriveKind::Constant => DriveProtocol::constant(system.phi0),
        DriveKind::ResonantSinusoid => DriveProtocol {
            kind,
            phi0: system.phi0,
            amplitude: amplitude.unwrap_or(system.v0_norm),
            frequency_ratio: frequency_ratio.unwrap_or(1.0),
        },
    };

    // --- initial conditions --------------------------------------------------
    let preset =
        match entries.take("preset", |v, l| Ok((v.to_string(), l)))? {
            None => Preset::Blue,
            Some(((v, line), _)) => match v.as_str() {
                "blue" => Preset::Blue,
                "red" => Preset::Red,
                "black" => Preset::Black,
                "custom" => Preset::Custom,
                other => return Err(err(
                    line,
                    format!(
                        "invalid value for `preset`: expected blue|red|black|custom, got `{other}`"
                    ),
                )),
            },
        };
    let v_init = check(
        entries.take("v_init", parse_f64("v_init"))?,
        "v_init",
        |_| true,
        "finite",
    )?;
    let u_init = check(
        entries.take("u_init", parse_f64("u_init"))?,
        "u_init",
        |_| true,
        "finite",
    )?;
    let init = if preset == Preset::Custom {
        let preset_line = entries.line_of("preset").unwrap_or(1);
        let Some(v) = v_init else {
            return Err(err(preset_line, "preset = custom requires `v_init`"));
        };
        let Some(u) = u_init else {
            return Err(err(preset_line, "preset = custom requires `u_init`"));
        };
        InitialConditions::custom(v, u)
    } else {
        for key in ["v_init", "u_init"] {
            if let Some(line) = entries.line_of(key) {
                return Err(err(line, format!("`{key}` requires preset = custom")));
            }
        }
        match preset {
            Preset::Blue => InitialConditions::blue(),
            Preset::Red => InitialConditions::red(),
            Preset::Black => InitialConditions::black(),
            Preset::Custom => unreachable!(),
        }
    };

    // --- solver grid and model -----------------------------------------------
    let mut solver = defaults.solver;
    if let Some((periods, line)) = entries.take("periods", parse_u32("periods"))? {
        if periods < 1 {
            return Err(err(line, "`periods` must be >= 1"));
        }
        solver.periods = periods;
    }
    if let Some((spp, line)) = entries.take("steps_per_period", parse_u32("steps_per_period"))? {
        if spp < 64 {
            return Err(err(
                line,
                format!("`steps_per_period` must be >= 64 (got {spp})"),
            ));
        }
        solver.steps_per_period = spp;
    }
    if let Some(((v, line), _)) = entries.take("memductance_form", |v, l| Ok((v.to_string(), l)))? {
        solver.memductance_form =
            match v.as_str() {
                "sin2" => MemductanceForm::Sin2,
                "cos2" => MemductanceForm::Cos2,
                other => return Err(err(
                    line,
                    format!(
                        "invalid value for `memductance_form`: expected sin2|cos2, got `{other}`"
                    ),
                )),
            };
    }
    if let Some(((v, line), _)) = entries.take("model", |v, l| Ok((v.to_string(), l)))? {
        solver.model = match v.as_str() {
            "memristor" => ModelKind::Memristor,
            "oracle" => ModelKind::Oracle,
            "classical" => ModelKind::Classical,
            "nonlinear_baseline" => ModelKind::NonlinearBaseline,
            other => {
                return Err(err(
                    line,
                    format!(
                        "invalid value for `model`: expected memristor|oracle|classical|nonlinear_baseline, got `{other}`"
                    ),
                ))
            }
        };
    }
    if let Err(e) = solver.validate() {
        let line = entries
            .line_of("periods")
            .or_else(|| entries.line_of("steps_per_period"))
            .unwrap_or(1);
        return Err(err(line, e.to_string()));
    }

    // --- bath (optional) -------------------------------------------------------
    let gap_ghz = check(
        entries.take("gap_ghz", parse_f64("gap_ghz"))?,
        "gap_ghz",
        |x| x > 0.0,
        "> 0",
    )?;
    let x_qp = check(
        entries.take("x_qp", parse_f64("x_qp"))?,
        "x_qp",
        |x| x >= 0.0,
        ">= 0",
    )?;
    let x_qp_a = check(
        entries.take("x_qp_a", parse_f64("x_qp_a"))?,
        "x_qp_a",
        |x| (0.0..=1.0).contains(&x),
        "in [0, 1]",
    )?;
    let g_t_us = check(
        entries.take("g_t_us", parse_f64("g_t_us"))?,
        "g_t_us",
        |x| x >= 0.0,
        ">= 0",
    )?;
    let bath = if gap_ghz.is_some() || x_qp.is_some() || x_qp_a.is_some() || g_t_us.is_some() {
        let scales = derive_scales(&system).map_err(|e| err(1, e.to_string()))?;
        let mut b = BathParams::default_for(&scales);
        if let Some(f) = gap_ghz {
            b.gap = crate::params::PLANCK_H * f * 1e9;
        }
        if let Some(x) = x_qp {
            b.x_qp = x;
        }
        if let Some(x) = x_qp_a {
            b.x_qp_a = x;
        }
        if let Some(g) = g_t_us {
            b.g_t = g * 1e-6;
        }
        Some(b)
    } else {
        None
    };

    // --- sweep (optional) --------------------------------------------------------
    let log10_s = entries.take("sweep_log10_s", |v, l| {
        v.split(',')
            .map(|piece| parse_f64("sweep_log10_s")(piece.trim(), l))
            .collect::<Result<Vec<f64>, _>>()
    })?;
    let sweep_periods = entries.take("sweep_periods", parse_u32("sweep_periods"))?;
    let sweep = if log10_s.is_some() || sweep_periods.is_some() {
        let mut spec = SweepSpec::default();
        let mut line = 1;
        if let Some((values, l)) = log10_s {
            spec.log10_s_values = values;
            line = l;
        }
        if let Some((p, l)) = sweep_periods {
            if p < 1 {
                return Err(err(l, "`sweep_periods` must be >= 1"));
            }
            spec.periods = p;
        }
        spec.validate().map_err(|e| err(line, e.to_string()))?;
        Some(spec)
    } else {
        None
    };

    // --- output ---------------------------------------------------------------
    let output_dir = match entries.take("output_dir", |v, l| Ok((v.to_string(), l)))? {
        None => defaults.output_dir,
        Some(((v, _), _)) => PathBuf::from(v),
    };
    let emit_svg = entries
        .take("emit_svg", parse_bool("emit_svg"))?
        .map(|(b, _)| b)
        .unwrap_or(defaults.emit_svg);

    // Backstop: the per-key checks above should leave nothing for the struct
    // validators to find; if they do, report it without a precise line.
    let cfg = RunConfig {
        system,
        drive,
        init,
        solver,
        bath,
        sweep,
        output_dir,
        emit_svg,
    };
    cfg.system.validate().map_err(|e| err(1, e.to_string()))?;
    cfg.drive.validate().map_err(|e| err(1, e.to_string()))?;
    cfg.init.validate().map_err(|e| err(1, e.to_string()))?;
    if let Some(b) = &cfg.bath {
        b.validate().map_err(|e| err(1, e.to_string()))?;
    }
    Ok(cfg)
}

//! File emission: CSV time series, JSON summary, SVG hysteresis figure.
//!
//! Every floating-point number leaves the process in scientific notation
//! with 12 significant digits (`1.23456789012e-4`), in CSV and JSON alike.
//! That makes output byte-identical across runs and platforms while keeping
//! more precision than any quantity here is good for; re-reading a CSV
//! reproduces the in-memory values to those 12 digits.  Non-finite numbers
//! become JSON `null` (they cannot appear in a successful run's series, but
//! a diagnostics ratio may legitimately be undefined).

use crate::analysis::{HysteresisReport, SweepRow};
use crate::diagnostics::DiagnosticsReport;
use crate::dynamics::{CurrentBalance, TimeSeries};
use crate::error::QmemError;
use crate::params::DerivedScales;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use std::f64::consts::TAU;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// 12-significant-digit scientific form used for all emitted reals.
pub fn fmt_sci(x: f64) -> String {
    format!("{x:.11e}")
}

fn file_access(path: &Path, source: io::Error) -> QmemError {
    QmemError::FileAccess {
        path: path.display().to_string(),
        source,
    }
}

/// The fixed column set of `timeseries.csv`.
pub const CSV_HEADER: &str =
    "tau,phi_d,phi_avg,phi_ind,v_norm,i_norm,g_norm,gamma_norm,damping_exp";

/// Write the nine-column time series.
pub fn write_timeseries_csv(path: &Path, ts: &TimeSeries) -> Result<(), QmemError> {
    let file = std::fs::File::create(path).map_err(|e| file_access(path, e))?;
    let mut w = BufWriter::new(file);
    (|| -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for j in 0..ts.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                fmt_sci(ts.tau[j]),
                fmt_sci(ts.phi_d[j]),
                fmt_sci(ts.phi_avg[j]),
                fmt_sci(ts.phi_ind[j]),
                fmt_sci(ts.v[j]),
                fmt_sci(ts.i[j]),
                fmt_sci(ts.g[j]),
                fmt_sci(ts.gamma[j]),
                fmt_sci(ts.damping_exp[j]),
            )?;
        }
        w.flush()
    })()
    .map_err(|e| file_access(path, e))
}

/// Write sweep results: one row per bath strength.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), QmemError> {
    let file = std::fs::File::create(path).map_err(|e| file_access(path, e))?;
    let mut w = BufWriter::new(file);
    (|| -> io::Result<()> {
        writeln!(w, "log10_s,i_ratio,v_ratio")?;
        for r in rows {
            writeln!(
                w,
                "{},{},{}",
                fmt_sci(r.log10_s),
                fmt_sci(r.i_ratio),
                fmt_sci(r.v_ratio)
            )?;
        }
        w.flush()
    })()
    .map_err(|e| file_access(path, e))
}

/// Derived scales translated to SI for the summary.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalesSummary {
    pub omega10_rad_per_s: f64,
    pub f10_ghz: f64,
    pub g0: f64,
    pub d0: f64,
    pub c_d_farad: f64,
    pub v0_volt: f64,
    /// Conductance unit G₀ of the current column: I = i_norm·G₀V₀.  (The
    /// CSV g_norm column is G_qp/(C_dω₁₀) instead — the damping coefficient,
    /// not a multiple of this unit.)
    pub g_unit_siemens: f64,
    pub period_ps: f64,
}

impl ScalesSummary {
    pub fn from_scales(s: &DerivedScales) -> Self {
        ScalesSummary {
            omega10_rad_per_s: s.omega10,
            f10_ghz: s.omega10 / TAU / 1e9,
            g0: s.g0,
            d0: s.d0,
            c_d_farad: s.c_d,
            v0_volt: s.v0_si,
            g_unit_siemens: s.g_norm,
            period_ps: TAU / s.omega10 * 1e12,
        }
    }
}

/// Everything `summary.json` holds.  `analysis` is `null` (with the reason in
/// `analysis_note`) when the series has no loops to quantify.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub model: &'static str,
    pub memductance_form: &'static str,
    pub scales: ScalesSummary,
    /// Worst per-step violation of (⟨φ⟩ − φ_ind) = φ_d, radians.
    pub max_residual: f64,
    /// Worst |i_ch + i_ind + i_qp| per sample; absent for models without a
    /// channel decomposition.
    pub conservation_max_abs_sum: Option<f64>,
    pub analysis: Option<HysteresisReport>,
    pub analysis_note: Option<String>,
    pub diagnostics: DiagnosticsReport,
}

impl Summary {
    pub fn conservation_from(balance: Option<&CurrentBalance>) -> Option<f64> {
        balance.map(|b| b.max_abs_sum)
    }
}

/// Pretty JSON with `write_f64` overridden to the 12-digit scientific form.
struct SciPretty<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for SciPretty<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.11e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Serialize any value with the project-wide number format.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, QmemError> {
    let mut out = Vec::new();
    let fmt = SciPretty {
        inner: PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
    value
        .serialize(&mut ser)
        .map_err(|e| QmemError::Usage(format!("json serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

pub fn write_summary_json(path: &Path, summary: &Summary) -> Result<(), QmemError> {
    let text = to_json_string(summary)?;
    std::fs::write(path, text).map_err(|e| file_access(path, e))
}

/// Hand-emitted v–i figure: the pinched loops as one polyline plus arrows
/// showing traversal direction.  Visual aid only — nothing downstream parses
/// it, and the polyline is decimated to keep the file small.
pub fn write_hysteresis_svg(path: &Path, ts: &TimeSeries) -> Result<(), QmemError> {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const MARGIN: f64 = 48.0;

    let n = ts.len();
    let vmax = ts.v.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1e-12) * 1.08;
    let imax = ts.i.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1e-12) * 1.08;
    let x_of = |v: f64| MARGIN + (v + vmax) / (2.0 * vmax) * (W - 2.0 * MARGIN);
    let y_of = |i: f64| MARGIN + (imax - i) / (2.0 * imax) * (H - 2.0 * MARGIN);

    let stride = n.div_ceil(2000).max(1);
    let mut pts: Vec<(f64, f64)> = (0..n)
        .step_by(stride)
        .map(|j| (x_of(ts.v[j]), y_of(ts.i[j])))
        .collect();
    if (n - 1) % stride != 0 {
        pts.push((x_of(ts.v[n - 1]), y_of(ts.i[n - 1])));
    }

    let mut svg = String::with_capacity(64 * 1024);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    // Axes through the pinch point (0, 0).
    svg.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{MARGIN}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#bbb\"/>\n",
        x_of(0.0),
        x_of(0.0),
        H - MARGIN
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#bbb\"/>\n",
        y_of(0.0),
        W - MARGIN,
        y_of(0.0)
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\">v / V0</text>\n",
        W - MARGIN + 6.0,
        y_of(0.0) + 4.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\">i / G0V0</text>\n",
        x_of(0.0) + 6.0,
        MARGIN - 8.0
    ));

    let mut points = String::with_capacity(pts.len() * 14);
    for (x, y) in &pts {
        points.push_str(&format!("{x:.2},{y:.2} "));
    }
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f6fb4\" stroke-width=\"1.3\"/>\n",
        points.trim_end()
    ));

    // Direction arrows at eight stations along the (decimated) trajectory.
    let stations = 8.min(pts.len().saturating_sub(1));
    for k in 0..stations {
        let j = k * (pts.len() - 1) / stations.max(1);
        let (x0, y0) = pts[j];
        let (x1, y1) = pts[j + 1];
        let angle = (y1 - y0).atan2(x1 - x0).to_degrees();
        svg.push_str(&format!(
            "<path d=\"M -7 -3.5 L 0 0 L -7 3.5\" fill=\"none\" stroke=\"#d65108\" \
             stroke-width=\"1.5\" transform=\"translate({:.2} {:.2}) rotate({:.1})\"/>\n",
            (x0 + x1) / 2.0,
            (y0 + y1) / 2.0,
            angle
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| file_access(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate_memristor, DriveProtocol, InitialConditions, SolverSettings};
    use crate::params::{derive_scales, SystemParams};

    fn short_run() -> TimeSeries {
        let s = SolverSettings {
            periods: 1,
            steps_per_period: 128,
            ..Default::default()
        };
        simulate_memristor(
            &SystemParams::default(),
            &DriveProtocol::default(),
            &InitialConditions::blue(),
            &s,
        )
        .unwrap()
    }

    #[test]
    fn scientific_format_is_stable_and_reversible() {
        assert_eq!(fmt_sci(1.0), "1.00000000000e0");
        assert_eq!(fmt_sci(-0.0015), "-1.50000000000e-3");
        assert_eq!(fmt_sci(0.0), "0.00000000000e0");
        for &x in &[
            std::f64::consts::PI * 1e-7,
            -44.7213595499958e9,
            2.2e-16,
            1e300,
        ] {
            let back: f64 = fmt_sci(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11, "{x} -> {back}");
        }
    }

    #[test]
    fn json_numbers_use_the_project_format() {
        #[derive(Serialize)]
        struct Probe {
            a: f64,
            arr: Vec<f64>,
            missing: Option<f64>,
        }
        let text = to_json_string(&Probe {
            a: 0.5,
            arr: vec![1.5, f64::NAN],
            missing: None,
        })
        .unwrap();
        assert!(text.contains("5.00000000000e-1"), "{text}");
        assert!(text.contains("1.50000000000e0"), "{text}");
        assert!(text.contains("null"), "{text}");
        assert!(text.ends_with("}\n"), "trailing newline expected");
    }

    #[test]
    fn csv_round_trips_to_twelve_digits() {
        let ts = short_run();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("timeseries.csv");
        write_timeseries_csv(&path, &ts).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), ts.len());
        for (j, row) in rows.iter().enumerate() {
            let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols.len(), 9);
            for (have, want) in cols.iter().zip([
                ts.tau[j],
                ts.phi_d[j],
                ts.phi_avg[j],
                ts.phi_ind[j],
                ts.v[j],
                ts.i[j],
                ts.g[j],
                ts.gamma[j],
                ts.damping_exp[j],
            ]) {
                let scale = want.abs().max(1e-300);
                assert!(
                    (have - want).abs() / scale < 1e-11,
                    "row {j}: {have} vs {want}"
                );
            }
        }
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = vec![
            SweepRow {
                log10_s: -4.0,
                i_ratio: 0.99999,
                v_ratio: 0.999991,
            },
            SweepRow {
                log10_s: 0.0,
                i_ratio: 0.9,
                v_ratio: 0.916,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_sweep_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("log10_s,i_ratio,v_ratio\n"));
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("-4.00000000000e0"));
    }

    #[test]
    fn svg_has_loop_and_arrows() {
        let ts = short_run();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hysteresis.svg");
        write_hysteresis_svg(&path, &ts).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("<svg "));
        assert!(text.contains("<polyline"));
        assert_eq!(text.matches("rotate(").count(), 8);
        assert!(text.ends_with("</svg>\n"));
    }

    #[test]
    fn scales_summary_reference_values() {
        let s = derive_scales(&SystemParams::default()).unwrap();
        let sum = ScalesSummary::from_scales(&s);
        assert!((sum.f10_ghz - 44.7213595499958).abs() < 1e-9);
        assert!((sum.period_ps - 22.36).abs() < 0.01);
        assert!((sum.g0 - 0.0747674).abs() < 1e-7);
    }

    #[test]
    fn unwritable_target_names_the_path() {
        let ts = short_run();
        let path = Path::new("/nonexistent-dir-for-sure/timeseries.csv");
        let e = write_timeseries_csv(path, &ts).unwrap_err();
        assert!(format!("{e}").contains("/nonexistent-dir-for-sure"), "{e}");
    }
}

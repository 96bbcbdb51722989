//! Gain-measurement reduction: the comparison method, the aperture-gain
//! ceiling, per-point aperture efficiency, and detection of the maximum
//! operating frequency (the knee where gain starts to fall as frequency
//! rises).

pub mod plot;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::{Error, Result, SPEED_OF_LIGHT};

/// Default sustained-drop threshold for knee detection, dB.
pub const DEFAULT_DROP_DB: f64 = 0.5;
/// Default number of consecutive confirming samples for knee detection.
pub const DEFAULT_CONFIRM_POINTS: usize = 3;

/// A calibrated gain trace: (frequency Hz, gain dBi) samples inside a band.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTrace {
    label: String,
    band: (f64, f64),
    points: Vec<(f64, f64)>,
}

impl GainTrace {
    /// Validates: at least 3 points, strictly increasing frequencies, all
    /// within `band`.
    pub fn new(label: impl Into<String>, band: (f64, f64), points: Vec<(f64, f64)>) -> Result<Self> {
        if !(band.0 > 0.0 && band.0 < band.1) {
            return Err(Error::Domain(format!(
                "band must satisfy 0 < start < stop, got [{}, {}]",
                band.0, band.1
            )));
        }
        if points.len() < 3 {
            return Err(Error::InsufficientData(format!(
                "gain trace needs at least 3 points, got {}",
                points.len()
            )));
        }
        check_increasing(&points)?;
        for &(f, _) in &points {
            if !(band.0..=band.1).contains(&f) {
                return Err(Error::Domain(format!(
                    "frequency {} Hz lies outside the band [{}, {}]",
                    f, band.0, band.1
                )));
            }
        }
        Ok(Self {
            label: label.into(),
            band,
            points,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn band(&self) -> (f64, f64) {
        self.band
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Same trace with every gain shifted by `offset_db`.
    pub fn offset(&self, offset_db: f64) -> Self {
        Self {
            label: self.label.clone(),
            band: self.band,
            points: self.points.iter().map(|&(f, g)| (f, g + offset_db)).collect(),
        }
    }
}

/// An uncalibrated received-power trace: (frequency Hz, power dB relative).
#[derive(Debug, Clone, PartialEq)]
pub struct RawPowerTrace {
    points: Vec<(f64, f64)>,
}

impl RawPowerTrace {
    /// Validates strictly increasing frequencies.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientData("empty power trace".into()));
        }
        check_increasing(&points)?;
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

fn check_increasing(points: &[(f64, f64)]) -> Result<()> {
    for pair in points.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::Domain(format!(
                "frequencies must be strictly increasing; {} Hz follows {} Hz",
                pair[1].0, pair[0].0
            )));
        }
    }
    Ok(())
}

/// Gain of the antenna under test by the comparison (gain-transfer) method:
/// G_aut(f) = G_ref(f) + P_aut(f) − P_ref(f), all in dB.
///
/// The three inputs must share one frequency grid exactly; no resampling is
/// performed, and a mismatch reports every offending frequency.
pub fn comparison_gain(
    aut: &RawPowerTrace,
    reference: &RawPowerTrace,
    ref_gain: &GainTrace,
    label: impl Into<String>,
) -> Result<GainTrace> {
    let grid: Vec<f64> = ref_gain.points().iter().map(|&(f, _)| f).collect();
    let mut offending = Vec::new();
    for trace in [aut.points(), reference.points()] {
        if trace.len() != grid.len() {
            offending.extend(trace.iter().map(|&(f, _)| f).filter(|f| !grid.contains(f)));
            offending.extend(grid.iter().copied().filter(|f| {
                !trace.iter().any(|&(tf, _)| tf == *f)
            }));
        } else {
            for (&(f, _), &gf) in trace.iter().zip(grid.iter()) {
                if f != gf {
                    offending.push(f);
                }
            }
        }
    }
    if !offending.is_empty() {
        offending.sort_by(|a, b| a.partial_cmp(b).unwrap());
        offending.dedup();
        return Err(Error::GridMismatch(offending));
    }
    let points: Vec<(f64, f64)> = ref_gain
        .points()
        .iter()
        .zip(aut.points())
        .zip(reference.points())
        .map(|((&(f, g_ref), &(_, p_aut)), &(_, p_ref))| (f, g_ref + p_aut - p_ref))
        .collect();
    GainTrace::new(label, ref_gain.band(), points)
}

/// Gain of a 100%-efficient aperture of diameter `D` at frequency `f`:
/// 10·log10((πD/λ)²) dBi with λ = c/f.
///
/// # Example
///
/// ```
/// let g = gyrolens::analysis::aperture_gain_ceiling(0.1, 20e9).unwrap();
/// assert!((g - 26.43).abs() < 0.01);
/// ```
pub fn aperture_gain_ceiling(diameter: f64, f: f64) -> Result<f64> {
    if !(diameter > 0.0) {
        return Err(Error::Domain(format!(
            "diameter must be positive, got {diameter}"
        )));
    }
    if !(f > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive, got {f}")));
    }
    let lambda = SPEED_OF_LIGHT / f;
    let x = std::f64::consts::PI * diameter / lambda;
    Ok(10.0 * (x * x).log10())
}

/// Aperture efficiency per point: linear ratio of measured gain to the
/// 100%-efficiency ceiling.
pub fn efficiency(trace: &GainTrace, diameter: f64) -> Result<Vec<(f64, f64)>> {
    trace
        .points()
        .iter()
        .map(|&(f, g)| {
            let ceiling = aperture_gain_ceiling(diameter, f)?;
            Ok((f, 10f64.powf((g - ceiling) / 10.0)))
        })
        .collect()
}

/// Outcome of knee detection on a gain trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KneeFinding {
    /// Gain starts falling at this frequency, Hz.
    Knee(f64),
    /// No sustained reduction before the band stop.
    ExceedsBand,
}

/// Finds the maximum operating frequency: the smallest sample f* whose
/// running gain maximum exceeds each of the next `confirm_points` samples by
/// at least `drop_db`. Returns [`KneeFinding::ExceedsBand`] when no such
/// sustained reduction exists.
pub fn detect_f_max(trace: &GainTrace, drop_db: f64, confirm_points: usize) -> Result<KneeFinding> {
    if !(drop_db > 0.0) {
        return Err(Error::Domain(format!(
            "drop_db must be positive, got {drop_db}"
        )));
    }
    if confirm_points == 0 {
        return Err(Error::Domain("confirm_points must be at least 1".into()));
    }
    let points = trace.points();
    if points.len() < confirm_points + 1 {
        return Err(Error::InsufficientData(format!(
            "knee detection needs at least {} samples, got {}",
            confirm_points + 1,
            points.len()
        )));
    }
    let mut running_max = f64::NEG_INFINITY;
    for i in 0..points.len() - confirm_points {
        running_max = running_max.max(points[i].1);
        let confirmed = points[i + 1..=i + confirm_points]
            .iter()
            .all(|&(_, g)| running_max - g >= drop_db);
        if confirmed {
            return Ok(KneeFinding::Knee(points[i].0));
        }
    }
    Ok(KneeFinding::ExceedsBand)
}

// ── CSV input / output ──────────────────────────────────────────────────────

const GAIN_HEADER: &str = "frequency_ghz,gain_dbi";
const POWER_HEADER: &str = "frequency_ghz,power_db";

fn parse_points(path: &Path, text: &str, header: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == header => {}
        Some((_, first)) => {
            return Err(Error::CsvParse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("expected header `{header}`, found `{}`", first.trim()),
            })
        }
        None => {
            return Err(Error::CsvParse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("empty file; expected header `{header}`"),
            })
        }
    }
    let mut points = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (f, v) = match (fields.next(), fields.next(), fields.next()) {
            (Some(f), Some(v), None) => (f.trim(), v.trim()),
            _ => {
                return Err(Error::CsvParse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("expected two comma-separated fields, found `{line}`"),
                })
            }
        };
        let f: f64 = f.parse().map_err(|_| Error::CsvParse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: format!("invalid frequency `{f}`"),
        })?;
        let v: f64 = v.parse().map_err(|_| Error::CsvParse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: format!("invalid value `{v}`"),
        })?;
        points.push((f * 1e9, v));
    }
    Ok(points)
}

/// Reads a gain trace from CSV (`frequency_ghz,gain_dbi`); the label is the
/// file stem.
pub fn read_gain_csv(path: &Path, band: (f64, f64)) -> Result<GainTrace> {
    let text = fs::read_to_string(path)?;
    let points = parse_points(path, &text, GAIN_HEADER)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".into());
    GainTrace::new(label, band, points)
}

/// Reads a raw power trace from CSV (`frequency_ghz,power_db`).
pub fn read_power_csv(path: &Path) -> Result<RawPowerTrace> {
    let text = fs::read_to_string(path)?;
    RawPowerTrace::new(parse_points(path, &text, POWER_HEADER)?)
}

/// Writes a gain trace as CSV (`frequency_ghz,gain_dbi`).
pub fn gain_trace_csv(trace: &GainTrace) -> String {
    let mut out = String::from("frequency_ghz,gain_dbi\n");
    for &(f, g) in trace.points() {
        let _ = writeln!(out, "{:.6},{:.6}", f / 1e9, g);
    }
    out
}

/// One row of the analysis report.
#[derive(Debug, Clone)]
pub struct TraceSummary {
    pub label: String,
    pub f_max: KneeFinding,
    pub peak_gain_dbi: f64,
    pub peak_efficiency: f64,
}

/// Summarizes each trace: knee, peak gain, and peak aperture efficiency.
pub fn summarize(
    traces: &[GainTrace],
    diameter: f64,
    drop_db: f64,
    confirm_points: usize,
) -> Result<Vec<TraceSummary>> {
    traces
        .iter()
        .map(|trace| {
            let f_max = detect_f_max(trace, drop_db, confirm_points)?;
            let peak_gain_dbi = trace
                .points()
                .iter()
                .map(|&(_, g)| g)
                .fold(f64::NEG_INFINITY, f64::max);
            let peak_efficiency = efficiency(trace, diameter)?
                .iter()
                .map(|&(_, e)| e)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(TraceSummary {
                label: trace.label().to_string(),
                f_max,
                peak_gain_dbi,
                peak_efficiency,
            })
        })
        .collect()
}

/// Renders trace summaries as CSV.
pub fn report_csv(summaries: &[TraceSummary]) -> String {
    let mut out = String::from("label,f_max_ghz,peak_gain_dbi,peak_efficiency\n");
    for s in summaries {
        let f_max = match s.f_max {
            KneeFinding::Knee(f) => format!("{:.3}", f / 1e9),
            KneeFinding::ExceedsBand => ">band".into(),
        };
        let _ = writeln!(
            out,
            "{},{},{:.3},{:.4}",
            s.label, f_max, s.peak_gain_dbi, s.peak_efficiency
        );
    }
    out
}

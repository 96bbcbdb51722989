//! Run configuration and the implementations behind the command-line tool.
//!
//! Configuration merges in order: built-in defaults, the `GYROLENS_OUT_DIR`
//! environment variable, an optional line-oriented `key = value` config file
//! (`#` starts a comment), then command-line flags. Lengths cross the
//! boundary in millimeters and frequencies in gigahertz; everything is held
//! in SI units internally. Validation reports every failure at once, and a
//! fixed config plus fixed inputs produce byte-identical outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{Point3, Vector3};

use crate::analysis::{
    comparison_gain, plot::svg_gain_plot, read_gain_csv, read_power_csv, report_csv, summarize,
    GainTrace, KneeFinding, DEFAULT_CONFIRM_POINTS, DEFAULT_DROP_DB,
};
use crate::gyroid::{MixingModel, ThresholdSolver};
use crate::lattice::{export_stl, extract_mesh, rasterize_with_solver};
use crate::profile::{LensSpec, PermittivityProfile};
use crate::raytrace::{focus_report, ray_paths_csv, trace_ray, Ray};
use crate::sizing::sizing_table;
use crate::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GYROLENS_OUT_DIR";

/// Permittivity mixing rule selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingKind {
    /// Fill-fraction-weighted average of host and air permittivities.
    VolumeAverage,
    /// Spherical air inclusions in the host dielectric.
    MaxwellGarnett,
}

impl MixingKind {
    /// Parses the config-file / CLI spelling of the rule.
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        match s {
            "volume-average" => Ok(Self::VolumeAverage),
            "maxwell-garnett" => Ok(Self::MaxwellGarnett),
            other => Err(format!(
                "unknown mixing rule `{other}` (expected `volume-average` or `maxwell-garnett`)"
            )),
        }
    }

    /// Canonical spelling for reports.
    pub fn name(self) -> &'static str {
        match self {
            Self::VolumeAverage => "volume-average",
            Self::MaxwellGarnett => "maxwell-garnett",
        }
    }
}

/// Full run configuration in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Lens diameter, m.
    pub diameter: f64,
    /// Permittivity of the fully dense printed material.
    pub eps_host: f64,
    /// Profile floor.
    pub eps_min: f64,
    /// Unit-cell edge for design and tracing, m.
    pub unit_cell: f64,
    /// Cell edges evaluated by the sizing command, m.
    pub cell_sizes: Vec<f64>,
    /// Mixing rule used to map fill fraction to permittivity.
    pub mixing: MixingKind,
    /// Voxel divisions per cell edge when meshing.
    pub voxels_per_cell: usize,
    /// Cell edges per guided wavelength at the frequency limit.
    pub ratio_limit: f64,
    /// Measurement band start, Hz.
    pub band_start: f64,
    /// Measurement band ceiling, Hz.
    pub band_ceiling: f64,
    /// Gain drop that counts as a sustained reduction, dB.
    pub drop_db: f64,
    /// Consecutive confirming samples required after the peak.
    pub confirm_points: usize,
    /// Seed for every stochastic estimator.
    pub seed: u64,
    /// Directory for output files; relative paths resolve against it.
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            diameter: 0.1,
            eps_host: 2.8,
            eps_min: 1.2,
            unit_cell: 0.01,
            cell_sizes: vec![0.005, 0.0075, 0.01, 0.0125],
            mixing: MixingKind::VolumeAverage,
            voxels_per_cell: 64,
            ratio_limit: 1.4,
            band_start: 18.0e9,
            band_ceiling: 40.0e9,
            drop_db: DEFAULT_DROP_DB,
            confirm_points: DEFAULT_CONFIRM_POINTS,
            seed: 0,
            out_dir: PathBuf::from("."),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> std::result::Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("{key}: expected a number, got `{value}`"))
}

fn parse_int(key: &str, value: &str) -> std::result::Result<u64, String> {
    value
        .parse::<u64>()
        .map_err(|_| format!("{key}: expected a non-negative integer, got `{value}`"))
}

impl RunConfig {
    /// Defaults, with the output directory taken from the environment when
    /// `GYROLENS_OUT_DIR` is set.
    pub fn from_env() -> Self {
        let mut config = Self::default();
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
            config.out_dir = PathBuf::from(dir);
        }
        config
    }

    /// Applies one `key = value` assignment. Lengths are in mm, frequencies
    /// in GHz.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "diameter_mm" => self.diameter = parse_f64(key, value)? * 1e-3,
            "eps_host" => self.eps_host = parse_f64(key, value)?,
            "eps_min" => self.eps_min = parse_f64(key, value)?,
            "unit_cell_mm" => self.unit_cell = parse_f64(key, value)? * 1e-3,
            "cell_sizes_mm" => {
                let mut sizes = Vec::new();
                for item in value.split(',') {
                    sizes.push(parse_f64(key, item.trim())? * 1e-3);
                }
                self.cell_sizes = sizes;
            }
            "mixing" => self.mixing = MixingKind::parse(value)?,
            "voxels_per_cell" => self.voxels_per_cell = parse_int(key, value)? as usize,
            "ratio_limit" => self.ratio_limit = parse_f64(key, value)?,
            "band_start_ghz" => self.band_start = parse_f64(key, value)? * 1e9,
            "band_ceiling_ghz" => self.band_ceiling = parse_f64(key, value)? * 1e9,
            "drop_db" => self.drop_db = parse_f64(key, value)?,
            "confirm_points" => self.confirm_points = parse_int(key, value)? as usize,
            "seed" => self.seed = parse_int(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Reads a `key = value` config file, reporting every bad line at once.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(vec![format!("{}: {e}", path.display())]))?;
        let mut errors = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(format!(
                    "{}:{}: expected `key = value`, got `{}`",
                    path.display(),
                    idx + 1,
                    raw.trim()
                ));
                continue;
            };
            if let Err(msg) = self.set(key.trim(), value.trim()) {
                errors.push(format!("{}:{}: {msg}", path.display(), idx + 1));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errors))
        }
    }

    /// The lens parameters implied by this configuration.
    pub fn lens_spec(&self) -> LensSpec {
        LensSpec {
            diameter: self.diameter,
            eps_host: self.eps_host,
            eps_min: self.eps_min,
            unit_cell: self.unit_cell,
        }
    }

    /// The configured mixing model.
    pub fn mixing_model(&self) -> MixingModel {
        match self.mixing {
            MixingKind::VolumeAverage => MixingModel::VolumeAverage {
                eps_host: self.eps_host,
            },
            MixingKind::MaxwellGarnett => MixingModel::MaxwellGarnett {
                eps_host: self.eps_host,
            },
        }
    }

    /// Checks every field and reports all violations together.
    pub fn validate(&self) -> Result<()> {
        let mut errors = match self.lens_spec().validate() {
            Ok(()) => Vec::new(),
            Err(Error::InvalidConfig(list)) => list,
            Err(other) => return Err(other),
        };
        if self.voxels_per_cell < 16 {
            errors.push(format!(
                "voxels_per_cell must be at least 16, got {}",
                self.voxels_per_cell
            ));
        }
        if !(self.ratio_limit > 0.0) {
            errors.push(format!(
                "ratio_limit must be positive, got {}",
                self.ratio_limit
            ));
        }
        if !(self.band_start > 0.0 && self.band_ceiling > self.band_start) {
            errors.push(format!(
                "band must satisfy 0 < start < ceiling, got {} to {} GHz",
                self.band_start / 1e9,
                self.band_ceiling / 1e9
            ));
        }
        if !(self.drop_db > 0.0) {
            errors.push(format!("drop_db must be positive, got {}", self.drop_db));
        }
        if self.confirm_points == 0 {
            errors.push("confirm_points must be at least 1".to_string());
        }
        if self.cell_sizes.is_empty() {
            errors.push("cell_sizes_mm must list at least one size".to_string());
        }
        for &l in &self.cell_sizes {
            if !(l > 0.0) {
                errors.push(format!("cell size must be positive, got {} mm", l * 1e3));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errors))
        }
    }

    /// Resolves an output path against the configured output directory.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.out_dir.join(path)
        }
    }
}

/// What the design command produced.
#[derive(Debug)]
pub struct DesignOutput {
    /// Human-readable summary, one fact per line.
    pub summary: String,
    /// Bytes written to the STL file, when one was requested.
    pub stl_bytes: Option<u64>,
}

/// Solves the lattice design, prints its summary, and optionally meshes it
/// to an STL file and a mesh-statistics CSV.
pub fn cmd_design(
    config: &RunConfig,
    stl: Option<&Path>,
    stats: Option<&Path>,
) -> Result<DesignOutput> {
    config.validate()?;
    let spec = config.lens_spec();
    let profile = spec.profile()?;
    let solver = ThresholdSolver::with_table(config.mixing_model(), 97, 400_000, config.seed);
    let design = rasterize_with_solver(&spec, &profile, &solver)?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "lens: D = {} mm, eps_host = {}, eps_min = {}, unit cell = {} mm ({} rule)",
        config.diameter * 1e3,
        config.eps_host,
        config.eps_min,
        config.unit_cell * 1e3,
        config.mixing.name(),
    );
    let _ = writeln!(summary, "cells across: {}", design.cells_across());
    let _ = writeln!(summary, "cells in lens: {}", design.cell_count());
    if let Some((lo, hi)) = design.threshold_range() {
        let _ = writeln!(summary, "threshold range: {:.6} to {:.6}", lo, hi);
        let _ = writeln!(
            summary,
            "effective permittivity range: {:.4} to {:.4}",
            solver.eps_at(lo),
            solver.eps_at(hi)
        );
    }

    let mut stl_bytes = None;
    if stl.is_some() || stats.is_some() {
        let mesh = extract_mesh(&design, config.voxels_per_cell)?;
        let _ = writeln!(
            summary,
            "mesh: {} vertices, {} triangles, watertight: {}",
            mesh.n_vertices(),
            mesh.n_triangles(),
            mesh.is_watertight()
        );
        if let Some(path) = stl {
            let path = config.resolve(path);
            let bytes = export_stl(&mesh, &path)?;
            let _ = writeln!(summary, "stl: {} bytes written to {}", bytes, path.display());
            stl_bytes = Some(bytes);
        }
        if let Some(path) = stats {
            let path = config.resolve(path);
            fs::write(&path, mesh.stats_csv())?;
            let _ = writeln!(summary, "mesh stats written to {}", path.display());
        }
    }
    Ok(DesignOutput { summary, stl_bytes })
}

/// What the sizing command produced.
#[derive(Debug)]
pub struct SizeOutput {
    /// Aligned table for the terminal.
    pub text: String,
    /// Machine-readable rows, `l_uc_mm,f_max_ghz,bandwidth_ghz,ratio`.
    pub csv: String,
}

/// Evaluates the frequency-limit rule for each configured cell size.
pub fn cmd_size(config: &RunConfig) -> Result<SizeOutput> {
    config.validate()?;
    let table = sizing_table(
        &config.cell_sizes,
        config.eps_host,
        config.ratio_limit,
        config.band_start,
        config.band_ceiling,
    )?;
    Ok(SizeOutput {
        text: table.to_text(),
        csv: table.to_csv(),
    })
}

/// Input files for deriving a gain trace by the comparison method.
#[derive(Debug)]
pub struct ComparisonInputs {
    /// Received power with the antenna under test, `frequency_ghz,power_db`.
    pub aut_power: PathBuf,
    /// Received power with the reference antenna, same grid.
    pub ref_power: PathBuf,
    /// Calibrated reference gain, `frequency_ghz,gain_dbi`.
    pub ref_gain: PathBuf,
    /// Label for the derived trace.
    pub label: String,
}

/// What the analysis command produced.
#[derive(Debug)]
pub struct AnalyzeOutput {
    /// Human-readable per-trace findings.
    pub text: String,
    /// Summary CSV, `label,f_max_ghz,peak_gain_dbi,peak_efficiency`.
    pub report_csv: String,
    /// Gain-versus-frequency plot with the aperture ceiling.
    pub svg: String,
}

/// Reads gain traces (plus an optional comparison-method triple), finds each
/// trace's frequency limit and peak efficiency, and renders report and plot.
pub fn cmd_analyze(
    config: &RunConfig,
    gain_csvs: &[PathBuf],
    comparison: Option<&ComparisonInputs>,
) -> Result<AnalyzeOutput> {
    config.validate()?;
    let band = (config.band_start, config.band_ceiling);
    let mut traces: Vec<GainTrace> = Vec::new();
    for path in gain_csvs {
        traces.push(read_gain_csv(path, band)?);
    }
    if let Some(cmp) = comparison {
        let aut = read_power_csv(&cmp.aut_power)?;
        let reference = read_power_csv(&cmp.ref_power)?;
        let ref_gain = read_gain_csv(&cmp.ref_gain, band)?;
        traces.push(comparison_gain(&aut, &reference, &ref_gain, cmp.label.clone())?);
    }
    if traces.is_empty() {
        return Err(Error::InsufficientData(
            "no gain traces given; pass at least one CSV".into(),
        ));
    }
    let summaries = summarize(&traces, config.diameter, config.drop_db, config.confirm_points)?;
    let mut text = String::new();
    for s in &summaries {
        let f_max = match s.f_max {
            KneeFinding::Knee(f) => format!("{:.2} GHz", f / 1e9),
            KneeFinding::ExceedsBand => {
                format!("above the {:.1} GHz band stop", config.band_ceiling / 1e9)
            }
        };
        let _ = writeln!(
            text,
            "{}: max operating frequency {}, peak gain {:.2} dBi, peak aperture efficiency {:.3}",
            s.label, f_max, s.peak_gain_dbi, s.peak_efficiency
        );
    }
    Ok(AnalyzeOutput {
        text,
        report_csv: report_csv(&summaries),
        svg: svg_gain_plot(&traces, Some(config.diameter), band),
    })
}

/// Options for the ray-tracing command.
#[derive(Debug)]
pub struct TraceOptions {
    /// Number of rays in the parallel bundle.
    pub rays: usize,
    /// Largest launch offset as a fraction of the lens radius.
    pub max_offset_fraction: f64,
    /// Integration step = radius / divisor.
    pub step_divisor: f64,
    /// Trace the ideal profile instead of the clamped one.
    pub ideal: bool,
    /// Also produce a per-ray path dump.
    pub dump_paths: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            rays: 9,
            max_offset_fraction: 0.8,
            step_divisor: 1000.0,
            ideal: false,
            dump_paths: false,
        }
    }
}

/// What the trace command produced.
#[derive(Debug)]
pub struct TraceOutput {
    /// Human-readable focus statistics.
    pub text: String,
    /// Path dump, `ray_id,s,x,y,z`, when requested.
    pub paths_csv: Option<String>,
}

/// Traces a parallel ray bundle through the lens and reports focal quality.
pub fn cmd_trace(config: &RunConfig, opts: &TraceOptions) -> Result<TraceOutput> {
    config.validate()?;
    let mut errors = Vec::new();
    if opts.rays == 0 {
        errors.push("rays must be at least 1".to_string());
    }
    if !(0.0..=0.9).contains(&opts.max_offset_fraction) {
        errors.push(format!(
            "max offset fraction must lie in [0, 0.9], got {}",
            opts.max_offset_fraction
        ));
    }
    if !(opts.step_divisor >= 500.0) {
        errors.push(format!(
            "step divisor must be at least 500, got {}",
            opts.step_divisor
        ));
    }
    if !errors.is_empty() {
        return Err(Error::InvalidConfig(errors));
    }

    let radius = config.diameter / 2.0;
    let profile = if opts.ideal {
        PermittivityProfile::ideal(radius)?
    } else {
        config.lens_spec().profile()?
    };
    let offsets: Vec<f64> = if opts.rays == 1 {
        vec![0.0]
    } else {
        (0..opts.rays)
            .map(|i| radius * opts.max_offset_fraction * i as f64 / (opts.rays - 1) as f64)
            .collect()
    };
    let step = radius / opts.step_divisor;
    let report = focus_report(&offsets, &profile, step)?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "profile: {}",
        if opts.ideal {
            "ideal (surface permittivity 1)".to_string()
        } else {
            format!("clamped at eps_min = {}", config.eps_min)
        }
    );
    let _ = writeln!(
        text,
        "rays contributing: {} (excluded: {})",
        report.rays, report.excluded
    );
    let _ = writeln!(
        text,
        "rms focal spread: {:.4e} m ({:.2e} of the radius)",
        report.rms_spread,
        report.rms_spread / radius
    );
    let _ = writeln!(
        text,
        "focal centroid: ({:.6}, {:.6}, {:.6}) m",
        report.focal_point.x, report.focal_point.y, report.focal_point.z
    );

    let paths_csv = if opts.dump_paths {
        let rays = offsets
            .iter()
            .map(|&offset| {
                let start = Ray::new(Point3::new(-2.0 * radius, offset, 0.0), Vector3::x())?;
                trace_ray(&start, &profile, step)
            })
            .collect::<Result<Vec<Ray>>>()?;
        Some(ray_paths_csv(&rays))
    } else {
        None
    };
    Ok(TraceOutput { text, paths_csv })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_documented_values() {
        let config = RunConfig::default();
        assert_eq!(config.diameter, 0.1);
        assert_eq!(config.eps_host, 2.8);
        assert_eq!(config.eps_min, 1.2);
        assert_eq!(config.ratio_limit, 1.4);
        assert_eq!(config.band_start, 18.0e9);
        assert_eq!(config.band_ceiling, 40.0e9);
        assert_eq!(config.voxels_per_cell, 64);
        assert_eq!(config.cell_sizes, vec![0.005, 0.0075, 0.01, 0.0125]);
    }

    #[test]
    fn config_file_parses_units_comments_and_lists() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(
            &path,
            "# lens geometry\n\
             diameter_mm = 80   # smaller prototype\n\
             unit_cell_mm = 7.5\n\
             cell_sizes_mm = 5, 7.5\n\
             mixing = maxwell-garnett\n\
             band_ceiling_ghz = 50\n\
             seed = 3\n",
        )
        .unwrap();
        let mut config = RunConfig::default();
        config.apply_file(&path).unwrap();
        assert!((config.diameter - 0.08).abs() < 1e-15);
        assert!((config.unit_cell - 0.0075).abs() < 1e-15);
        assert_eq!(config.cell_sizes.len(), 2);
        assert_eq!(config.mixing, MixingKind::MaxwellGarnett);
        assert_eq!(config.band_ceiling, 50.0e9);
        assert_eq!(config.seed, 3);
        // Untouched keys keep their defaults.
        assert_eq!(config.eps_host, 2.8);
    }

    #[test]
    fn config_file_reports_every_bad_line_with_its_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        fs::write(
            &path,
            "diameter_mm = wide\nno equals here\nwavelength = 3\n",
        )
        .unwrap();
        let err = RunConfig::default().apply_file(&path).unwrap_err();
        let Error::InvalidConfig(list) = err else {
            panic!("expected a config error, got {err}");
        };
        assert_eq!(list.len(), 3, "all three bad lines must be reported: {list:?}");
        assert!(list[0].contains(":1:"), "first error names line 1: {}", list[0]);
        assert!(list[1].contains(":2:"));
        assert!(list[2].contains("unknown key"));
    }

    #[test]
    fn validate_collects_all_failures_at_once() {
        let config = RunConfig {
            eps_min: 3.0, // above eps_host
            voxels_per_cell: 4,
            drop_db: -1.0,
            ..RunConfig::default()
        };
        let err = config.validate().unwrap_err();
        let Error::InvalidConfig(list) = err else {
            panic!("expected a config error");
        };
        assert!(
            list.len() >= 3,
            "eps_min, voxels_per_cell, and drop_db must all be reported: {list:?}"
        );
    }

    #[test]
    fn relative_outputs_resolve_against_the_output_directory() {
        let config = RunConfig {
            out_dir: PathBuf::from("/tmp/runs"),
            ..RunConfig::default()
        };
        assert_eq!(
            config.resolve(Path::new("lens.stl")),
            PathBuf::from("/tmp/runs/lens.stl")
        );
        assert_eq!(
            config.resolve(Path::new("/abs/lens.stl")),
            PathBuf::from("/abs/lens.stl")
        );
    }

    #[test]
    fn design_summary_reports_eight_cells_for_the_coarsest_lattice() {
        let config = RunConfig {
            unit_cell: 0.0125,
            ..RunConfig::default()
        };
        let out = cmd_design(&config, None, None).unwrap();
        assert!(
            out.summary.contains("cells across: 8"),
            "summary was:\n{}",
            out.summary
        );
        assert!(out.stl_bytes.is_none());
    }

    #[test]
    fn design_rejects_a_floor_above_the_host() {
        let config = RunConfig {
            eps_min: 3.0,
            ..RunConfig::default()
        };
        let err = cmd_design(&config, None, None).unwrap_err();
        assert!(err.to_string().contains("eps_min"));
    }

    #[test]
    fn size_produces_four_rows_under_defaults() {
        let out = cmd_size(&RunConfig::default()).unwrap();
        let lines: Vec<&str> = out.csv.trim_end().lines().collect();
        assert_eq!(lines[0], "l_uc_mm,f_max_ghz,bandwidth_ghz,ratio");
        assert_eq!(lines.len(), 5, "header plus one row per cell size");
        assert!(out.text.contains("l_uc"));
    }

    #[test]
    fn analyze_finds_a_planted_knee_and_writes_the_plot() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lens_gain.csv");
        let mut csv = String::from("frequency_ghz,gain_dbi\n");
        for i in 0..45 {
            let f = 18.0 + 0.5 * i as f64;
            let g = if f <= 25.0 {
                20.0 + 0.3 * (f - 18.0)
            } else {
                22.1 - 1.0 * (f - 25.0)
            };
            csv.push_str(&format!("{f},{g}\n"));
        }
        fs::write(&path, csv).unwrap();
        let out = cmd_analyze(&RunConfig::default(), &[path], None).unwrap();
        assert!(
            out.text.contains("lens_gain: max operating frequency 25.00 GHz"),
            "analysis said:\n{}",
            out.text
        );
        assert!(out.report_csv.starts_with("label,f_max_ghz"));
        assert!(out.svg.contains("<svg"));
        assert!(out.svg.contains("100% aperture efficiency"));
    }

    #[test]
    fn analyze_rejects_a_headerless_csv_naming_line_one() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("raw.csv");
        fs::write(&path, "18.0,20.0\n18.5,20.1\n19.0,20.2\n").unwrap();
        let err = cmd_analyze(&RunConfig::default(), &[path], None).unwrap_err();
        let Error::CsvParse { line, .. } = err else {
            panic!("expected a parse error, got {err}");
        };
        assert_eq!(line, 1, "the header itself is wrong");
    }

    #[test]
    fn trace_of_the_ideal_profile_focuses_tightly() {
        let config = RunConfig::default();
        let opts = TraceOptions {
            ideal: true,
            dump_paths: true,
            ..TraceOptions::default()
        };
        let out = cmd_trace(&config, &opts).unwrap();
        assert!(out.text.contains("rays contributing: 9"));
        let paths = out.paths_csv.expect("paths were requested");
        assert!(paths.starts_with("ray_id,s,x,y,z"));
        // Focal spread is printed in scientific notation; the ideal lens at
        // this step size comes in well under 1e-4 of the radius.
        let rms_line = out
            .text
            .lines()
            .find(|l| l.starts_with("rms focal spread"))
            .unwrap();
        let ratio: f64 = rms_line
            .split('(')
            .nth(1)
            .unwrap()
            .split_whitespace()
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert!(ratio < 1e-3, "ideal-profile spread too wide: {rms_line}");
    }

    #[test]
    fn trace_rejects_bad_options_all_at_once() {
        let opts = TraceOptions {
            rays: 0,
            max_offset_fraction: 0.95,
            step_divisor: 100.0,
            ..TraceOptions::default()
        };
        let err = cmd_trace(&RunConfig::default(), &opts).unwrap_err();
        let Error::InvalidConfig(list) = err else {
            panic!("expected option errors");
        };
        assert_eq!(list.len(), 3, "rays, offset, and step must all be reported");
    }
}

//! Command-line entry point wiring the subcommands to the library.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gyrolens::cli::{
    cmd_analyze, cmd_design, cmd_size, cmd_trace, ComparisonInputs, MixingKind, RunConfig,
    TraceOptions,
};
use gyrolens::Error;

#[derive(Parser)]
#[command(
    name = "gyrolens",
    version,
    about = "Design and verification toolkit for gyroid-lattice Luneburg lens antennas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Configuration flags shared by every subcommand. A set flag overrides the
/// config file, which overrides built-in defaults.
#[derive(Args)]
struct CommonArgs {
    /// Path to a `key = value` config file (`#` comments allowed).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lens diameter in millimeters.
    #[arg(long)]
    diameter_mm: Option<f64>,
    /// Relative permittivity of the fully dense printed material.
    #[arg(long)]
    eps_host: Option<f64>,
    /// Smallest permittivity the lattice is asked to realize.
    #[arg(long)]
    eps_min: Option<f64>,
    /// Unit-cell edge in millimeters.
    #[arg(long)]
    unit_cell_mm: Option<f64>,
    /// Mixing rule: volume-average or maxwell-garnett.
    #[arg(long)]
    mixing: Option<String>,
    /// Voxel divisions per cell edge when meshing.
    #[arg(long)]
    voxels_per_cell: Option<usize>,
    /// Cell edges per guided wavelength at the frequency limit.
    #[arg(long)]
    ratio_limit: Option<f64>,
    /// Measurement band start in GHz.
    #[arg(long)]
    band_start_ghz: Option<f64>,
    /// Measurement band ceiling in GHz.
    #[arg(long)]
    band_ceiling_ghz: Option<f64>,
    /// Gain drop that counts as a sustained reduction, in dB.
    #[arg(long)]
    drop_db: Option<f64>,
    /// Consecutive confirming samples required after the peak.
    #[arg(long)]
    confirm_points: Option<usize>,
    /// Seed for all stochastic estimators.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for output files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl CommonArgs {
    fn build_config(&self) -> gyrolens::Result<RunConfig> {
        let mut config = RunConfig::from_env();
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        if let Some(v) = self.diameter_mm {
            config.diameter = v * 1e-3;
        }
        if let Some(v) = self.eps_host {
            config.eps_host = v;
        }
        if let Some(v) = self.eps_min {
            config.eps_min = v;
        }
        if let Some(v) = self.unit_cell_mm {
            config.unit_cell = v * 1e-3;
        }
        if let Some(m) = &self.mixing {
            config.mixing = MixingKind::parse(m).map_err(|e| Error::InvalidConfig(vec![e]))?;
        }
        if let Some(v) = self.voxels_per_cell {
            config.voxels_per_cell = v;
        }
        if let Some(v) = self.ratio_limit {
            config.ratio_limit = v;
        }
        if let Some(v) = self.band_start_ghz {
            config.band_start = v * 1e9;
        }
        if let Some(v) = self.band_ceiling_ghz {
            config.band_ceiling = v * 1e9;
        }
        if let Some(v) = self.drop_db {
            config.drop_db = v;
        }
        if let Some(v) = self.confirm_points {
            config.confirm_points = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(dir) = &self.out_dir {
            config.out_dir = dir.clone();
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve per-cell gyroid thresholds; optionally mesh and export STL.
    Design {
        #[command(flatten)]
        common: CommonArgs,
        /// Write a binary STL of the lattice to this path.
        #[arg(long)]
        stl: Option<PathBuf>,
        /// Write a mesh-statistics CSV to this path.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Evaluate the unit-cell frequency limit for each configured size.
    Size {
        #[command(flatten)]
        common: CommonArgs,
        /// Cell sizes in mm, comma separated, overriding the config list.
        #[arg(long)]
        cells_mm: Option<String>,
        /// Write the CSV rows to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Analyze gain traces: frequency limit, efficiency, report, and plot.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Gain CSV file (frequency_ghz,gain_dbi); repeatable.
        #[arg(long = "gain", value_name = "CSV")]
        gains: Vec<PathBuf>,
        /// Received-power CSV measured with the antenna under test.
        #[arg(long)]
        aut_power: Option<PathBuf>,
        /// Received-power CSV measured with the reference antenna.
        #[arg(long)]
        ref_power: Option<PathBuf>,
        /// Calibrated reference-antenna gain CSV.
        #[arg(long)]
        ref_gain: Option<PathBuf>,
        /// Label for the comparison-method trace.
        #[arg(long, default_value = "comparison")]
        label: String,
        /// Summary CSV path (default: gain_report.csv in the out dir).
        #[arg(long)]
        report: Option<PathBuf>,
        /// SVG plot path (default: gain_plot.svg in the out dir).
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Trace a parallel ray bundle and report focal quality.
    Trace {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of rays in the bundle.
        #[arg(long, default_value_t = 9)]
        rays: usize,
        /// Largest launch offset as a fraction of the radius (at most 0.9).
        #[arg(long, default_value_t = 0.8)]
        max_offset: f64,
        /// Integration step divisor: step = radius / divisor (at least 500).
        #[arg(long, default_value_t = 1000.0)]
        step_divisor: f64,
        /// Trace the ideal profile instead of the clamped one.
        #[arg(long)]
        ideal: bool,
        /// Write a per-ray path CSV to this path.
        #[arg(long)]
        paths: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> gyrolens::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Design { common, stl, stats } => {
            let config = common.build_config()?;
            let out = cmd_design(&config, stl.as_deref(), stats.as_deref())?;
            print!("{}", out.summary);
        }
        Command::Size {
            common,
            cells_mm,
            csv,
        } => {
            let mut config = common.build_config()?;
            if let Some(cells) = &cells_mm {
                config
                    .set("cell_sizes_mm", cells)
                    .map_err(|e| Error::InvalidConfig(vec![e]))?;
            }
            let out = cmd_size(&config)?;
            print!("{}", out.text);
            if let Some(path) = csv {
                let path = config.resolve(&path);
                fs::write(&path, out.csv)?;
                println!("csv written to {}", path.display());
            }
        }
        Command::Analyze {
            common,
            gains,
            aut_power,
            ref_power,
            ref_gain,
            label,
            report,
            plot,
        } => {
            let config = common.build_config()?;
            let comparison = match (aut_power, ref_power, ref_gain) {
                (Some(aut), Some(reference), Some(gain)) => Some(ComparisonInputs {
                    aut_power: aut,
                    ref_power: reference,
                    ref_gain: gain,
                    label,
                }),
                (None, None, None) => None,
                _ => {
                    return Err(Error::InvalidConfig(vec![
                        "the comparison method needs --aut-power, --ref-power, and --ref-gain together"
                            .to_string(),
                    ]))
                }
            };
            let out = cmd_analyze(&config, &gains, comparison.as_ref())?;
            print!("{}", out.text);
            let report_path =
                config.resolve(report.as_deref().unwrap_or(Path::new("gain_report.csv")));
            fs::write(&report_path, &out.report_csv)?;
            println!("report written to {}", report_path.display());
            let plot_path = config.resolve(plot.as_deref().unwrap_or(Path::new("gain_plot.svg")));
            fs::write(&plot_path, &out.svg)?;
            println!("plot written to {}", plot_path.display());
        }
        Command::Trace {
            common,
            rays,
            max_offset,
            step_divisor,
            ideal,
            paths,
        } => {
            let config = common.build_config()?;
            let opts = TraceOptions {
                rays,
                max_offset_fraction: max_offset,
                step_divisor,
                ideal,
                dump_paths: paths.is_some(),
            };
            let out = cmd_trace(&config, &opts)?;
            print!("{}", out.text);
            if let (Some(path), Some(csv)) = (paths, out.paths_csv) {
                let path = config.resolve(&path);
                fs::write(&path, csv)?;
                println!("paths written to {}", path.display());
            }
        }
    }
    Ok(())
}

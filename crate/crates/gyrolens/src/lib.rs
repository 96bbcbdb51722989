//! Design and verification toolkit for gradient-index (GRIN) Luneburg lens
//! antennas built from a spatially varying gyroid lattice.
//!
//! The crate covers the full workflow:
//!
//! * [`profile`] — the clamped Luneburg permittivity profile ε(r) = 2 − (r/R)².
//! * [`gyroid`] — the gyroid implicit field, Monte Carlo fill fraction, and the
//!   fill-fraction → effective-permittivity mapping with threshold inversion.
//! * [`lattice`] — rasterizing the profile onto a cubic lattice of gyroid unit
//!   cells, watertight surface extraction, and binary STL export.
//! * [`sizing`] — the unit-cell upper-frequency guideline (cells larger than
//!   about 1.4 guided wavelengths stop behaving as an effective medium) and
//!   the sizing report it implies for a candidate set of cell sizes.
//! * [`analysis`] — gain-measurement reduction: the comparison method, the
//!   aperture-gain ceiling, aperture efficiency, and knee detection for the
//!   usable upper frequency.
//! * [`raytrace`] — GRIN ray tracing through the lens profile to verify
//!   focusing behaviour independently of the lattice realization.
//!
//! All lengths are carried in meters and frequencies in hertz internally; the
//! command line accepts millimeters and gigahertz and converts at the edge.

// Validation guards are written `!(x > 0.0)` rather than `x <= 0.0` so that
// NaN fails them too; the negated form is load-bearing.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod gyroid;
pub mod lattice;
pub mod profile;
pub mod raytrace;
pub mod sizing;

use std::path::PathBuf;

/// Speed of light in vacuum, m/s, as used by every frequency/wavelength
/// conversion in this crate.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the design and analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    Domain(String),

    /// A target permittivity cannot be realized by the host/air mixture.
    #[error(
        "target permittivity {target} is outside the achievable range \
         [1, {eps_host}] for this host material"
    )]
    UnreachablePermittivity { target: f64, eps_host: f64 },

    /// Two traces were combined whose frequency grids do not match exactly.
    #[error("frequency grids do not match; offending frequencies (Hz): {0:?}")]
    GridMismatch(Vec<f64>),

    /// A detector or report had too few samples to produce an answer.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A CSV input failed to parse; the line number is 1-based.
    #[error("{path}:{line}: {message}")]
    CsvParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// One or more configuration fields failed validation. Every failure is
    /// listed, not just the first.
    #[error("invalid configuration:\n{}", format_config_errors(.0))]
    InvalidConfig(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_config_errors(errors: &[String]) -> String {
    errors
        .iter()
        .map(|e| format!("  - {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

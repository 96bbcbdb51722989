//! Gyroid implicit field and the mapping from wall thickness to effective
//! permittivity.
//!
//! The gyroid level-set function on a cubic cell of edge `l` is
//!
//! ```text
//! g(p) = sin u·cos v + sin v·cos w + sin w·cos u,   u = 2πx/l, v = 2πy/l, w = 2πz/l
//! ```
//!
//! Material is kept where `|g(p)| ≤ t`; the threshold `t ∈ [0, 1.5]` sets the
//! wall thickness and therefore the solid fill fraction φ(t) of a cell. A
//! mixing model turns φ into an effective permittivity, and
//! [`ThresholdSolver`] inverts that chain to find the `t` that realizes a
//! target permittivity.

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// Largest magnitude the gyroid function attains: 1.5, reached for example at
/// (l/8, l/8, l/8). Thresholds at or above this value give a fully solid cell.
pub const GYROID_MAX_ABS: f64 = 1.5;

/// Largest gradient magnitude of the gyroid function with respect to phase
/// (2π·x / l): √3, attained at the lattice origin. Dividing by the phase
/// scale — multiplying by 2π/l — bounds the spatial gradient, which converts
/// a distance into the largest gyroid-value change possible over it.
pub const GYROID_MAX_GRAD: f64 = 1.732_050_807_568_877_2;

/// Gyroid level-set value at point `p` for unit-cell edge `unit_cell`.
///
/// # Example
///
/// ```
/// use nalgebra::Point3;
/// let g = gyrolens::gyroid::gyroid_value(&Point3::origin(), 0.01);
/// assert_eq!(g, 0.0);
/// ```
pub fn gyroid_value(p: &Point3<f64>, unit_cell: f64) -> f64 {
    let k = std::f64::consts::TAU / unit_cell;
    let (su, cu) = (k * p.x).sin_cos();
    let (sv, cv) = (k * p.y).sin_cos();
    let (sw, cw) = (k * p.z).sin_cos();
    su * cv + sv * cw + sw * cu
}

/// A gyroid surface with a fixed wall-thickness threshold and phase origin.
#[derive(Debug, Clone, PartialEq)]
pub struct GyroidField {
    unit_cell: f64,
    threshold: f64,
    origin: Point3<f64>,
}

impl GyroidField {
    /// Builds a field; `unit_cell` must be positive and `threshold` must lie
    /// in `[0, 1.5]`.
    pub fn new(unit_cell: f64, threshold: f64) -> Result<Self> {
        if !(unit_cell > 0.0) {
            return Err(Error::Domain(format!(
                "unit_cell must be positive, got {unit_cell}"
            )));
        }
        if !(0.0..=GYROID_MAX_ABS).contains(&threshold) {
            return Err(Error::Domain(format!(
                "threshold must lie in [0, {GYROID_MAX_ABS}], got {threshold}"
            )));
        }
        Ok(Self {
            unit_cell,
            threshold,
            origin: Point3::origin(),
        })
    }

    /// Same field with its phase origin moved to `origin`.
    pub fn with_origin(mut self, origin: Point3<f64>) -> Self {
        self.origin = origin;
        self
    }

    pub fn unit_cell(&self) -> f64 {
        self.unit_cell
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Level-set value relative to the phase origin.
    pub fn value(&self, p: &Point3<f64>) -> f64 {
        gyroid_value(&(p - self.origin.coords), self.unit_cell)
    }

    /// True where material is kept: |g(p)| ≤ t.
    pub fn is_solid(&self, p: &Point3<f64>) -> bool {
        self.value(p).abs() <= self.threshold
    }
}

// ── Fill fraction ───────────────────────────────────────────────────────────

/// Samples per RNG stream; fixed so results do not depend on worker count.
const CHUNK: u64 = 1 << 16;

/// Solid fill fraction φ(t) of a gyroid cell, by seeded Monte Carlo over one
/// period. The result is deterministic for a given `(samples, seed)` pair and
/// independent of thread count: sampling is split into fixed-size chunks, one
/// ChaCha8 stream per chunk, and the per-chunk hit counts are summed.
///
/// φ is scale-invariant, so no cell size is taken: φ(0) = 0 and φ(1.5) = 1.
pub fn fill_fraction(threshold: f64, samples: u64, seed: u64) -> f64 {
    fill_fraction_with_stderr(threshold, samples, seed).0
}

/// Fill fraction plus its binomial standard error √(φ(1−φ)/n).
pub fn fill_fraction_with_stderr(threshold: f64, samples: u64, seed: u64) -> (f64, f64) {
    assert!(samples > 0, "sample count must be positive");
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = CHUNK.min(samples - chunk * CHUNK);
            let mut hits = 0u64;
            for _ in 0..count {
                let p = Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
                if gyroid_value(&p, 1.0).abs() <= threshold {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let phi = hits as f64 / samples as f64;
    let stderr = (phi * (1.0 - phi) / samples as f64).sqrt();
    (phi, stderr)
}

/// Renders a φ(t) table as CSV with columns `t,phi,stderr`.
pub fn fill_fraction_csv(nodes: usize, samples: u64, seed: u64) -> String {
    let mut out = String::from("t,phi,stderr\n");
    for i in 0..nodes {
        let t = GYROID_MAX_ABS * i as f64 / (nodes - 1) as f64;
        let (phi, stderr) = fill_fraction_with_stderr(t, samples, seed);
        out.push_str(&format!("{t:.10},{phi:.10},{stderr:.3e}\n"));
    }
    out
}

// ── Effective permittivity ──────────────────────────────────────────────────

/// Rule for mixing host material (relative permittivity `eps_host`) with air.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixingModel {
    /// Volume-weighted average: ε = 1 + φ·(ε_host − 1).
    VolumeAverage { eps_host: f64 },
    /// Maxwell Garnett with air inclusions (volume fraction 1 − φ) in the
    /// host material.
    MaxwellGarnett { eps_host: f64 },
}

impl MixingModel {
    pub fn eps_host(&self) -> f64 {
        match *self {
            MixingModel::VolumeAverage { eps_host } => eps_host,
            MixingModel::MaxwellGarnett { eps_host } => eps_host,
        }
    }
}

/// Effective permittivity of a cell with solid fill fraction `phi`.
///
/// Both models are strictly increasing in φ and agree at the endpoints:
/// ε(0) = 1 (all air) and ε(1) = ε_host (fully dense).
pub fn eps_eff(phi: f64, model: &MixingModel) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::Domain(format!(
            "fill fraction must lie in [0, 1], got {phi}"
        )));
    }
    let eps_host = model.eps_host();
    if !(eps_host >= 1.0) {
        return Err(Error::Domain(format!(
            "eps_host must be at least 1, got {eps_host}"
        )));
    }
    match model {
        MixingModel::VolumeAverage { .. } => Ok(1.0 + phi * (eps_host - 1.0)),
        MixingModel::MaxwellGarnett { .. } => {
            let eps_i = 1.0; // air inclusions
            let f = 1.0 - phi;
            let num = eps_i + 2.0 * eps_host + 2.0 * f * (eps_i - eps_host);
            let den = eps_i + 2.0 * eps_host - f * (eps_i - eps_host);
            Ok(eps_host * num / den)
        }
    }
}

// ── Threshold inversion ─────────────────────────────────────────────────────

/// Tolerance (in permittivity) to which thresholds are solved.
pub const EPS_SOLVE_TOL: f64 = 1e-4;

/// Inverts the chain t → φ(t) → ε_eff by bisection over a memoized Monte
/// Carlo table of φ(t).
///
/// The table is built once at construction: φ is sampled on an even grid of
/// `t`, made monotone (Monte Carlo noise can locally invert the order), and
/// interpolated linearly between nodes. Determinism follows from the seeded
/// sampler, so a solver built from the same parameters always returns the
/// same thresholds.
#[derive(Debug, Clone)]
pub struct ThresholdSolver {
    model: MixingModel,
    ts: Vec<f64>,
    phis: Vec<f64>,
}

impl ThresholdSolver {
    /// Solver with the default table: 97 nodes, 4·10⁵ samples each, seed 0.
    pub fn new(model: MixingModel) -> Self {
        Self::with_table(model, 97, 400_000, 0)
    }

    /// Solver with explicit table resolution and sampling seed.
    pub fn with_table(model: MixingModel, nodes: usize, samples_per_node: u64, seed: u64) -> Self {
        assert!(nodes >= 2, "need at least two table nodes");
        let ts: Vec<f64> = (0..nodes)
            .map(|i| GYROID_MAX_ABS * i as f64 / (nodes - 1) as f64)
            .collect();
        let mut phis: Vec<f64> = ts
            .par_iter()
            .map(|&t| fill_fraction(t, samples_per_node, seed))
            .collect();
        // Isotonic cleanup: enforce the exact monotonicity the noiseless
        // curve has, so bisection sees a well-ordered table.
        for i in 1..phis.len() {
            if phis[i] < phis[i - 1] {
                phis[i] = phis[i - 1];
            }
        }
        Self { model, ts, phis }
    }

    pub fn model(&self) -> &MixingModel {
        &self.model
    }

    /// Interpolated fill fraction at threshold `t ∈ [0, 1.5]`.
    pub fn fill_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, GYROID_MAX_ABS);
        let step = self.ts[1] - self.ts[0];
        let idx = ((t / step) as usize).min(self.ts.len() - 2);
        let frac = (t - self.ts[idx]) / step;
        self.phis[idx] + frac * (self.phis[idx + 1] - self.phis[idx])
    }

    /// Effective permittivity the table predicts at threshold `t`.
    pub fn eps_at(&self, t: f64) -> f64 {
        eps_eff(self.fill_at(t), &self.model).expect("interpolated fill stays in [0, 1]")
    }

    /// Threshold realizing `eps_target`, to within [`EPS_SOLVE_TOL`] in
    /// permittivity. Targets outside `[1, eps_host]` are unreachable.
    pub fn threshold_for_eps(&self, eps_target: f64) -> Result<f64> {
        let eps_host = self.model.eps_host();
        if !(1.0..=eps_host).contains(&eps_target) {
            return Err(Error::UnreachablePermittivity {
                target: eps_target,
                eps_host,
            });
        }
        let (mut lo, mut hi) = (0.0f64, GYROID_MAX_ABS);
        loop {
            let mid = 0.5 * (lo + hi);
            let eps = self.eps_at(mid);
            if (eps - eps_target).abs() <= EPS_SOLVE_TOL || hi - lo < 1e-13 {
                return Ok(mid);
            }
            if eps < eps_target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// The memoized (t, φ) table, for inspection and persistence.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ts.iter().copied().zip(self.phis.iter().copied())
    }
}

/// Exact symmetries of the gyroid function, exposed for verification.
///
/// Returns the largest violation over the three identities at point `p`:
/// invariance under translation by half the body diagonal, sign flip under
/// inversion, and invariance under cyclic coordinate permutation.
pub fn symmetry_residual(p: &Point3<f64>, unit_cell: f64) -> f64 {
    let g = gyroid_value(p, unit_cell);
    let half = Vector3::repeat(unit_cell / 2.0);
    let translated = gyroid_value(&(p + half), unit_cell);
    let inverted = gyroid_value(&Point3::from(-p.coords), unit_cell);
    let cycled = gyroid_value(&Point3::new(p.y, p.z, p.x), unit_cell);
    (translated - g)
        .abs()
        .max((inverted + g).abs())
        .max((cycled - g).abs())
}

//! Rasterization of the radial profile onto a cubic gyroid lattice, and
//! extraction of a watertight print mesh.
//!
//! All cells share a single global gyroid phase so walls run continuously
//! across cell boundaries; only the threshold varies from cell to cell,
//! chosen so the local fill fraction realizes the clamped profile at the
//! cell-center radius. The printable solid is the sphere-masked set
//! |g(p)| ≤ t(cell(p)), and meshing samples its signed function
//! max((|p| − R)·s, |g(p)| − t) on a padded voxel grid, where the positive
//! factor s converts the metric sphere excess into gyroid units so both
//! terms interpolate on a common scale.

mod marching;
mod mesh;
mod stl;

use std::collections::BTreeMap;

use nalgebra::Point3;

use crate::gyroid::{
    gyroid_value, GyroidField, MixingModel, ThresholdSolver, GYROID_MAX_ABS, GYROID_MAX_GRAD,
};
use crate::profile::{LensSpec, PermittivityProfile};
use crate::{Error, Result};

use marching::SampleGrid;

pub use mesh::TriangleMesh;
pub use stl::{export_stl, stl_bytes};

/// Number of unit cells spanning the diameter: ceil(D / l_uc), with a snap
/// so quotients that are integer up to rounding noise (0.1 / 0.0125, say)
/// do not gain a spurious extra cell.
pub fn cells_across(diameter: f64, unit_cell: f64) -> usize {
    let q = diameter / unit_cell;
    let nearest = q.round();
    let n = if (q - nearest).abs() < 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        q.ceil()
    };
    n as usize
}

/// Per-cell gyroid thresholds realizing the clamped profile on the lattice.
#[derive(Debug, Clone)]
pub struct LatticeDesign {
    spec: LensSpec,
    profile: PermittivityProfile,
    cells_across: usize,
    /// Dense cube of thresholds in (i, j, k) scan order; `None` marks cells
    /// that lie entirely outside the lens sphere.
    thresholds: Vec<Option<f64>>,
}

impl LatticeDesign {
    /// The lens parameters this design realizes.
    pub fn spec(&self) -> &LensSpec {
        &self.spec
    }

    /// The radial permittivity profile the thresholds were solved against.
    pub fn profile(&self) -> &PermittivityProfile {
        &self.profile
    }

    /// Cells along each lattice axis.
    pub fn cells_across(&self) -> usize {
        self.cells_across
    }

    /// Center of cell (i, j, k); the lattice is centered on the origin.
    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> Point3<f64> {
        let n = self.cells_across as f64;
        let h = self.spec.unit_cell / 2.0;
        Point3::new(
            h * (2.0 * i as f64 + 1.0 - n),
            h * (2.0 * j as f64 + 1.0 - n),
            h * (2.0 * k as f64 + 1.0 - n),
        )
    }

    /// Threshold of cell (i, j, k); `None` if the cell misses the sphere.
    pub fn threshold_at(&self, i: usize, j: usize, k: usize) -> Option<f64> {
        let n = self.cells_across;
        assert!(i < n && j < n && k < n, "cell index out of range");
        self.thresholds[(i * n + j) * n + k]
    }

    /// Index of the cell containing `p`, clamped to the lattice.
    pub fn cell_of(&self, p: &Point3<f64>) -> (usize, usize, usize) {
        let n = self.cells_across;
        let half = n as f64 / 2.0;
        let axis = |x: f64| {
            let idx = (x / self.spec.unit_cell + half).floor();
            (idx.max(0.0) as usize).min(n - 1)
        };
        (axis(p.x), axis(p.y), axis(p.z))
    }

    /// Threshold of the cell containing `p`.
    pub fn threshold_for_point(&self, p: &Point3<f64>) -> Option<f64> {
        let (i, j, k) = self.cell_of(p);
        self.threshold_at(i, j, k)
    }

    /// Number of cells that carry a threshold.
    pub fn cell_count(&self) -> usize {
        self.thresholds.iter().filter(|t| t.is_some()).count()
    }

    /// Smallest and largest threshold over the lattice, if any cell is set.
    pub fn threshold_range(&self) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        for t in self.thresholds.iter().flatten() {
            range = Some(match range {
                None => (*t, *t),
                Some((lo, hi)) => (lo.min(*t), hi.max(*t)),
            });
        }
        range
    }

    /// Builds a design with one threshold for every sphere-touching cell;
    /// useful for calibration pieces and degenerate-solid tests.
    pub fn with_uniform_threshold(spec: &LensSpec, threshold: f64) -> Result<Self> {
        spec.validate()?;
        if !(0.0..=GYROID_MAX_ABS).contains(&threshold) {
            return Err(Error::Domain(format!(
                "threshold must lie in [0, {GYROID_MAX_ABS}], got {threshold}"
            )));
        }
        let profile = spec.profile()?;
        let n = cells_across(spec.diameter, spec.unit_cell);
        let mut design = LatticeDesign {
            spec: spec.clone(),
            profile,
            cells_across: n,
            thresholds: vec![None; n * n * n],
        };
        let r = spec.radius();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = design.cell_center(i, j, k);
                    if nearest_corner_distance_sq(&c, spec.unit_cell / 2.0) <= r * r {
                        design.thresholds[(i * n + j) * n + k] = Some(threshold);
                    }
                }
            }
        }
        Ok(design)
    }
}

/// Squared distance from the origin to the closest point of the axis-aligned
/// cube of half-width `h` centered at `c`.
fn nearest_corner_distance_sq(c: &Point3<f64>, h: f64) -> f64 {
    let mut d2 = 0.0;
    for a in 0..3 {
        let d = c[a].abs() - h;
        if d > 0.0 {
            d2 += d * d;
        }
    }
    d2
}

/// Solves one threshold per cell so the lattice realizes the clamped profile.
///
/// Cells whose center lies inside the sphere are solved at the center
/// radius; cells that only graze the sphere are solved at the surface value.
/// Cells at equal center radius receive bit-identical thresholds.
pub fn rasterize(
    spec: &LensSpec,
    profile: &PermittivityProfile,
    model: MixingModel,
) -> Result<LatticeDesign> {
    let solver = ThresholdSolver::new(model);
    rasterize_with_solver(spec, profile, &solver)
}

/// Like [`rasterize`], but reuses an already-built threshold solver.
pub fn rasterize_with_solver(
    spec: &LensSpec,
    profile: &PermittivityProfile,
    solver: &ThresholdSolver,
) -> Result<LatticeDesign> {
    spec.validate()?;
    if !(spec.unit_cell < spec.diameter) {
        return Err(Error::Domain(format!(
            "unit cell ({} m) must be smaller than the lens diameter ({} m)",
            spec.unit_cell, spec.diameter
        )));
    }
    let r = spec.radius();
    if (profile.radius() - r).abs() > 1e-12 * r
        || (profile.eps_min() - spec.eps_min).abs() > 1e-12
    {
        return Err(Error::Domain(
            "profile radius/floor does not match the lens parameters".into(),
        ));
    }
    let host = solver.model().eps_host();
    if (host - spec.eps_host).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "mixing model host permittivity ({host}) does not match the lens \
             material ({})",
            spec.eps_host
        )));
    }

    let n = cells_across(spec.diameter, spec.unit_cell);
    let half = spec.unit_cell / 2.0;
    let mut thresholds = vec![None; n * n * n];
    // Cell centers sit at (l/2)·m with integer m, so m·m is an exact radius
    // class: equal-radius cells share one solved threshold bit-for-bit.
    let mut class_thresholds: BTreeMap<i64, f64> = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let m = [
                    2 * i as i64 + 1 - n as i64,
                    2 * j as i64 + 1 - n as i64,
                    2 * k as i64 + 1 - n as i64,
                ];
                let center = Point3::new(
                    half * m[0] as f64,
                    half * m[1] as f64,
                    half * m[2] as f64,
                );
                if nearest_corner_distance_sq(&center, half) > r * r {
                    continue;
                }
                let class = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
                let t = match class_thresholds.get(&class) {
                    Some(&t) => t,
                    None => {
                        let center_radius = half * (class as f64).sqrt();
                        let eps_target = profile.eval(center_radius.min(r))?;
                        let t = solver.threshold_for_eps(eps_target)?;
                        class_thresholds.insert(class, t);
                        t
                    }
                };
                thresholds[(i * n + j) * n + k] = Some(t);
            }
        }
    }
    Ok(LatticeDesign {
        spec: spec.clone(),
        profile: profile.clone(),
        cells_across: n,
        thresholds,
    })
}

/// Signed function of the lattice solid: negative strictly inside, zero on
/// the boundary, positive outside, as the max of a sphere term and a gyroid
/// term. The sphere excess |p| − R is a length while |g| − t is a gyroid
/// value, so the length is scaled by the gyroid's spatial gradient bound
/// (2π/l·√3) onto the gyroid scale. The sign pattern is unchanged by the
/// positive factor, and edge interpolation during meshing then lands on
/// whichever surface is genuinely nearer instead of being dragged by the
/// smaller-magnitude unit.
pub fn signed_field(p: &Point3<f64>, design: &LatticeDesign) -> f64 {
    let l = design.spec.unit_cell;
    let scale = std::f64::consts::TAU * GYROID_MAX_GRAD / l;
    let sphere = (p.coords.norm() - design.spec.radius()) * scale;
    match design.threshold_for_point(p) {
        Some(t) => sphere.max(gyroid_value(p, l).abs() - t),
        None => sphere,
    }
}

/// True iff `p` lies inside the lens sphere and within a gyroid wall.
///
/// # Example
///
/// ```
/// use nalgebra::Point3;
/// use gyrolens::gyroid::MixingModel;
/// use gyrolens::lattice::{rasterize, solid_indicator};
/// use gyrolens::profile::LensSpec;
///
/// let spec = LensSpec { diameter: 0.1, eps_host: 2.8, eps_min: 1.2, unit_cell: 0.0125 };
/// let design = rasterize(&spec, &spec.profile().unwrap(),
///     MixingModel::VolumeAverage { eps_host: 2.8 }).unwrap();
/// assert!(solid_indicator(&Point3::origin(), &design));
/// assert!(!solid_indicator(&Point3::new(0.06, 0.0, 0.0), &design));
/// ```
pub fn solid_indicator(p: &Point3<f64>, design: &LatticeDesign) -> bool {
    if p.coords.norm() > design.spec.radius() {
        return false;
    }
    match design.threshold_for_point(p) {
        Some(t) => gyroid_value(p, design.spec.unit_cell).abs() <= t,
        None => false,
    }
}

/// Extracts the watertight boundary mesh of the lattice solid by sampling
/// its signed function at `voxels_per_cell` divisions per cell edge.
pub fn extract_mesh(design: &LatticeDesign, voxels_per_cell: usize) -> Result<TriangleMesh> {
    if voxels_per_cell < 16 {
        return Err(Error::Domain(format!(
            "voxels_per_cell must be at least 16, got {voxels_per_cell}"
        )));
    }
    let n = design.cells_across;
    let spacing = design.spec.unit_cell / voxels_per_cell as f64;
    let half_extent = n as f64 * design.spec.unit_cell / 2.0;
    // One voxel of padding per side keeps every boundary sample outside.
    let samples = n * voxels_per_cell + 3;
    let o = -half_extent - spacing;
    let grid = SampleGrid {
        origin: Point3::new(o, o, o),
        spacing,
        nx: samples,
        ny: samples,
        nz: samples,
    };
    Ok(marching::extract(&grid, |p| signed_field(p, design)))
}

/// Meshes a single unit cell [0, l]³ of a uniform-threshold gyroid, clipped
/// by the cell box so the result is watertight with flush caps.
pub fn extract_cell_mesh(field: &GyroidField, voxels: usize) -> Result<TriangleMesh> {
    if voxels < 16 {
        return Err(Error::Domain(format!(
            "voxels must be at least 16, got {voxels}"
        )));
    }
    let l = field.unit_cell();
    let t = field.threshold();
    let spacing = l / voxels as f64;
    // Staggered sampling: planes sit at half-voxel offsets (−h/2, h/2, …,
    // l + h/2), so the box faces fall strictly between sample planes. Were a
    // sample plane to coincide with a face, the clipped field would be
    // non-negative across the whole plane and the cap rims could only snap
    // to in-wall samples, eating a margin strip around every cap; staggered,
    // the rims register as ordinary edge crossings at full grid resolution,
    // and the outermost planes are outside the box so every contour closes.
    let samples = voxels + 2;
    let grid = SampleGrid {
        origin: Point3::new(-spacing / 2.0, -spacing / 2.0, -spacing / 2.0),
        spacing,
        nx: samples,
        ny: samples,
        nz: samples,
    };
    // The box excess is a length; scale it onto the gyroid value axis (see
    // `signed_field`) so wall crossings interpolate on the gyroid term. Face
    // samples sit at excess exactly 0, which the scaling preserves, keeping
    // the clip caps flush with the box.
    let scale = std::f64::consts::TAU * GYROID_MAX_GRAD / l;
    let f = move |p: &Point3<f64>| {
        let box_excess = (-p.x)
            .max(p.x - l)
            .max(-p.y)
            .max(p.y - l)
            .max(-p.z)
            .max(p.z - l);
        (field.value(p).abs() - t).max(box_excess * scale)
    };
    Ok(marching::extract(&grid, f))
}

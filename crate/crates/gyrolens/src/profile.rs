//! Radial permittivity profile of the lens.
//!
//! The ideal Luneburg profile is ε(r) = 2 − (r/R)², falling from 2 at the
//! center to 1 at the surface. A printable lattice cannot reach ε = 1 (the
//! walls would vanish), so the manufactured profile follows the ideal curve
//! down to a floor `eps_min` and holds that value out to the surface.

use crate::{Error, Result};

/// Geometry and material parameters of one lens design.
#[derive(Debug, Clone, PartialEq)]
pub struct LensSpec {
    /// Lens diameter in meters.
    pub diameter: f64,
    /// Relative permittivity of the fully dense printed material.
    pub eps_host: f64,
    /// Floor applied to the profile; the smallest permittivity the lattice
    /// is asked to realize.
    pub eps_min: f64,
    /// Gyroid unit-cell edge length in meters.
    pub unit_cell: f64,
}

impl LensSpec {
    /// Lens radius in meters.
    pub fn radius(&self) -> f64 {
        self.diameter / 2.0
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if !(self.diameter > 0.0) {
            errors.push(format!("diameter must be positive, got {}", self.diameter));
        }
        if !(self.unit_cell > 0.0) {
            errors.push(format!(
                "unit_cell must be positive, got {}",
                self.unit_cell
            ));
        }
        if self.diameter > 0.0 && self.unit_cell > self.diameter {
            errors.push(format!(
                "unit_cell ({}) must not exceed the diameter ({})",
                self.unit_cell, self.diameter
            ));
        }
        if !(self.eps_min >= 1.0) {
            errors.push(format!("eps_min must be at least 1, got {}", self.eps_min));
        }
        if !(self.eps_min < self.eps_host) {
            errors.push(format!(
                "eps_min ({}) must be below eps_host ({})",
                self.eps_min, self.eps_host
            ));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errors))
        }
    }

    /// The clamped radial profile implied by this spec.
    pub fn profile(&self) -> Result<PermittivityProfile> {
        PermittivityProfile::new(self.radius(), self.eps_min)
    }
}

/// Ideal Luneburg permittivity at radius `r` for a lens of radius `radius`.
///
/// # Example
///
/// ```
/// let eps = gyrolens::profile::eval_luneburg(0.5, 1.0).unwrap();
/// assert!((eps - 1.75).abs() < 1e-15);
/// ```
pub fn eval_luneburg(r: f64, radius: f64) -> Result<f64> {
    check_radial_args(r, radius)?;
    let x = r / radius;
    Ok(2.0 - x * x)
}

/// Manufactured profile: the Luneburg curve clamped from below at `eps_min`.
pub fn eval_clamped(r: f64, radius: f64, eps_min: f64) -> Result<f64> {
    if !(eps_min >= 1.0) {
        return Err(Error::Domain(format!(
            "eps_min must be at least 1, got {eps_min}"
        )));
    }
    Ok(eval_luneburg(r, radius)?.max(eps_min))
}

/// Radius at which the Luneburg curve meets the floor: r* = R·√(2 − eps_min).
///
/// Inside r* the profile follows the ideal curve; outside it is flat at
/// `eps_min`. With `eps_min = 1` the clamp sits exactly on the surface.
pub fn clamp_radius(radius: f64, eps_min: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if !(1.0..=2.0).contains(&eps_min) {
        return Err(Error::Domain(format!(
            "eps_min must lie in [1, 2], got {eps_min}"
        )));
    }
    Ok(radius * (2.0 - eps_min).sqrt())
}

fn check_radial_args(r: f64, radius: f64) -> Result<()> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if !(0.0..=radius).contains(&r) {
        return Err(Error::Domain(format!(
            "radial coordinate {r} must lie in [0, {radius}]"
        )));
    }
    Ok(())
}

/// Clamped Luneburg profile with its parameters validated once at
/// construction, so evaluation is infallible for radii in `[0, radius]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermittivityProfile {
    radius: f64,
    eps_min: f64,
    clamp_radius: f64,
}

impl PermittivityProfile {
    /// Builds a profile clamped at `eps_min`; fails on nonpositive radius or
    /// `eps_min` outside `[1, 2]`.
    pub fn new(radius: f64, eps_min: f64) -> Result<Self> {
        let clamp_radius = clamp_radius(radius, eps_min)?;
        Ok(Self {
            radius,
            eps_min,
            clamp_radius,
        })
    }

    /// The unclamped ideal profile (floor at exactly 1, reached only at the
    /// surface).
    pub fn ideal(radius: f64) -> Result<Self> {
        Self::new(radius, 1.0)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eps_min(&self) -> f64 {
        self.eps_min
    }

    /// Radius beyond which the profile is flat at `eps_min`.
    pub fn clamp_radius(&self) -> f64 {
        self.clamp_radius
    }

    /// Permittivity at radius `r`; `r` must lie in `[0, radius]`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        eval_clamped(r, self.radius, self.eps_min)
    }

    /// Refractive index n(r) = √ε(r), with `r` clamped to the lens interior
    /// so surface-boundary roundoff cannot fail.
    pub fn index(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.radius);
        eval_clamped(r, self.radius, self.eps_min)
            .expect("profile arguments validated at construction")
            .sqrt()
    }

    /// Radial derivative dn/dr. Zero on the clamped shell and at the center;
    /// on the graded region dn/dr = −r / (R²·n). The graded branch includes
    /// its outer boundary: when the floor sits exactly on the surface the
    /// shell has zero width, and ray integration evaluating exactly at r = R
    /// must see the interior slope, not the flat one.
    pub fn index_slope(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.radius);
        if r > self.clamp_radius {
            0.0
        } else {
            -r / (self.radius * self.radius * self.index(r))
        }
    }
}

//! Fresnel-zone bookkeeping on the RIS aperture.
//!
//! The excess path of a reflection point `q` is the extra distance a ray
//! travels via `q` compared with the direct line between the foci. Zone `m`
//! collects points with excess path in `[(m-1)·λ/2, m·λ/2)`; odd zones add
//! in phase with the direct path and even zones add out of phase.

use crate::error::{Error, Result};
use crate::geometry::frame::{PlaneFrame, RisGeometry};
use crate::geometry::vector::Point3;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Minimum focal separation accepted by the zone kernels.
pub const MIN_FOCAL_DISTANCE: f64 = 1e-9;

/// Tolerance on the distance of a point from the plane for the far-field
/// linearization.
pub const PLANE_TOLERANCE: f64 = 1e-9;

pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

pub(crate) fn focal_distance(tx: Point3, rx: Point3) -> Result<f64> {
    let d = tx.distance(&rx);
    if d < MIN_FOCAL_DISTANCE {
        Err(Error::DegenerateFoci { distance: d })
    } else {
        Ok(d)
    }
}

/// `‖tx − q‖ + ‖q − rx‖ − ‖tx − rx‖`, clamped at zero against rounding.
pub fn excess_path(tx: Point3, rx: Point3, q: Point3) -> Result<f64> {
    let los = focal_distance(tx, rx)?;
    Ok((tx.distance(&q) + q.distance(&rx) - los).max(0.0))
}

/// Zone index and half-wave residual of an excess path. Buckets are closed
/// at the lower edge, so `δ = m·λ/2` belongs to zone `m + 1`.
pub fn zone_of(delta: f64, wavelength: f64) -> (u64, f64) {
    let half = wavelength / 2.0;
    let mut k = (2.0 * delta / wavelength).floor().max(0.0);
    let mut r = delta - k * half;
    // floor() of a rounded quotient can land one bucket off.
    if r < 0.0 && k > 0.0 {
        k -= 1.0;
        r = delta - k * half;
    } else if r >= half {
        k += 1.0;
        r = delta - k * half;
    }
    (k as u64 + 1, r.clamp(0.0, half.next_down()))
}

/// Per-element excess path, zone index and residual for one pair of foci.
#[derive(Debug, Clone, PartialEq)]
pub struct FresnelMap {
    wavelength: f64,
    los_distance: f64,
    excess: Vec<f64>,
    zones: Vec<u64>,
    residuals: Vec<f64>,
}

impl FresnelMap {
    /// Buckets precomputed excess paths.
    pub fn from_excess_paths(excess: Vec<f64>, wavelength: f64, los_distance: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidParameter(format!("wavelength {wavelength} must be positive")));
        }
        if let Some(bad) = excess.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::InvalidParameter(format!("excess path {bad} must be finite and nonnegative")));
        }
        let (zones, residuals) = excess.iter().map(|&d| zone_of(d, wavelength)).unzip();
        Ok(Self {
            wavelength,
            los_distance,
            excess,
            zones,
            residuals,
        })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn los_distance(&self) -> f64 {
        self.los_distance
    }

    pub fn len(&self) -> usize {
        self.excess.len()
    }

    pub fn is_empty(&self) -> bool {
        self.excess.is_empty()
    }

    pub fn excess_paths(&self) -> &[f64] {
        &self.excess
    }

    pub fn zones(&self) -> &[u64] {
        &self.zones
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_zone(&self) -> Option<u64> {
        self.zones.iter().copied().max()
    }
}

pub fn build_fresnel_map(tx: Point3, rx: Point3, geom: &RisGeometry, wavelength: f64) -> Result<FresnelMap> {
    let los = focal_distance(tx, rx)?;
    let mut excess = Vec::with_capacity(geom.len());
    for i in 0..geom.nx() {
        for j in 0..geom.ny() {
            let q = geom.element_position(i, j);
            excess.push((tx.distance(&q) + q.distance(&rx) - los).max(0.0));
        }
    }
    FresnelMap::from_excess_paths(excess, wavelength, los)
}

/// Sum of the unit directions from the plane center toward `tx` and `rx`.
fn far_field_gradient(tx: Point3, rx: Point3, frame: &PlaneFrame) -> Result<crate::geometry::Vector3> {
    let c = frame.center();
    let to_tx = (tx - c).normalized().ok_or(Error::CoincidentPoints { distance: 0.0 })?;
    let to_rx = (rx - c).normalized().ok_or(Error::CoincidentPoints { distance: 0.0 })?;
    Ok(to_tx + to_rx)
}

/// Plane-wave linearization of the excess path about the frame center,
/// relative to the center's own excess path.
pub fn far_field_excess_path(tx: Point3, rx: Point3, frame: &PlaneFrame, q: Point3) -> Result<f64> {
    let offset = frame.signed_distance(q);
    if offset.abs() >= PLANE_TOLERANCE {
        return Err(Error::OffPlane { offset });
    }
    let g = far_field_gradient(tx, rx, frame)?;
    Ok(-g.dot(&(q - frame.center())))
}

/// Linear coefficients `(du, dv)` of the far-field excess path in plane
/// coordinates: `δ_ff(u, v) = du·u + dv·v`.
pub fn far_field_plane_gradient(tx: Point3, rx: Point3, frame: &PlaneFrame) -> Result<(f64, f64)> {
    let g = far_field_gradient(tx, rx, frame)?;
    Ok((-g.dot(&frame.u_axis()), -g.dot(&frame.v_axis())))
}

/// Fresnel map of the far-field approximation: the center's exact excess
/// path plus the linearized variation across the aperture.
pub fn build_far_field_map(tx: Point3, rx: Point3, geom: &RisGeometry, wavelength: f64) -> Result<FresnelMap> {
    let los = focal_distance(tx, rx)?;
    let center_excess = excess_path(tx, rx, geom.frame().center())?;
    let (du, dv) = far_field_plane_gradient(tx, rx, geom.frame())?;
    let mut excess = Vec::with_capacity(geom.len());
    for i in 0..geom.nx() {
        for j in 0..geom.ny() {
            let (u, v) = geom.element_plane_coords(i, j);
            excess.push(center_excess + du * u + dv * v);
        }
    }
    FresnelMap::from_excess_paths(excess, wavelength, los)
}

/// `2·D²/λ`.
pub fn fraunhofer_distance(aperture_diameter: f64, wavelength: f64) -> f64 {
    2.0 * aperture_diameter * aperture_diameter / wavelength
}

//! Intersections of Fresnel boundary ellipsoids with a plane.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::fresnel::{excess_path, far_field_plane_gradient, focal_distance};
use crate::geometry::frame::PlaneFrame;
use crate::geometry::vector::Point3;

/// Relative tolerance used when classifying conics.
pub const CLASSIFY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConicKind {
    Ellipse,
    Point,
    Empty,
    Degenerate,
}

impl ConicKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConicKind::Ellipse => "ellipse",
            ConicKind::Point => "point",
            ConicKind::Empty => "empty",
            ConicKind::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for ConicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `A·u² + B·u·v + C·v² + D·u + E·v + F = 0` in plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicSection {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    kind: ConicKind,
}

impl ConicSection {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        let mut conic = Self {
            a,
            b,
            c,
            d,
            e,
            f,
            kind: ConicKind::Degenerate,
        };
        conic.kind = conic.classify();
        conic
    }

    pub fn kind(&self) -> ConicKind {
        self.kind
    }

    pub fn coefficients(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    pub fn evaluate(&self, u: f64, v: f64) -> f64 {
        self.a * u * u + self.b * u * v + self.c * v * v + self.d * u + self.e * v + self.f
    }

    fn classify(&self) -> ConicKind {
        let scale = self
            .coefficients()
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return ConicKind::Degenerate;
        }
        let [a, b, c, d, e, f] = self.coefficients().map(|x| x / scale);
        let disc = b * b - 4.0 * a * c;
        if disc < -CLASSIFY_TOL {
            // Elliptic type: orient so the quadratic part is positive definite.
            let sign = if a + c > 0.0 { 1.0 } else { -1.0 };
            let (a, b, c, d, e, f) = (a * sign, b * sign, c * sign, d * sign, e * sign, f * sign);
            let det = 4.0 * a * c - b * b;
            let u0 = (b * e - 2.0 * c * d) / det;
            let v0 = (b * d - 2.0 * a * e) / det;
            let f0 = f + 0.5 * (d * u0 + e * v0);
            if f0 < -CLASSIFY_TOL {
                ConicKind::Ellipse
            } else if f0 <= CLASSIFY_TOL {
                ConicKind::Point
            } else {
                ConicKind::Empty
            }
        } else if a.abs() <= CLASSIFY_TOL
            && b.abs() <= CLASSIFY_TOL
            && c.abs() <= CLASSIFY_TOL
            && d.abs() <= CLASSIFY_TOL
            && e.abs() <= CLASSIFY_TOL
        {
            // Only the constant survives: 0 = F has no solution.
            ConicKind::Empty
        } else {
            ConicKind::Degenerate
        }
    }

    /// Center of an elliptic-type conic.
    pub fn center(&self) -> Option<(f64, f64)> {
        let det = 4.0 * self.a * self.c - self.b * self.b;
        if !matches!(self.kind, ConicKind::Ellipse | ConicKind::Point) || det == 0.0 {
            return None;
        }
        let u0 = (self.b * self.e - 2.0 * self.c * self.d) / det;
        let v0 = (self.b * self.d - 2.0 * self.a * self.e) / det;
        Some((u0, v0))
    }

    /// Semi-axis lengths `(major, minor)` and the angle of the major axis
    /// from the u axis, for an ellipse.
    pub fn ellipse_axes(&self) -> Option<(f64, f64, f64)> {
        if self.kind != ConicKind::Ellipse {
            return None;
        }
        let (u0, v0) = self.center()?;
        let f0 = self.f + 0.5 * (self.d * u0 + self.e * v0);
        let mean = 0.5 * (self.a + self.c);
        let radius = (0.5 * (self.a - self.c)).hypot(0.5 * self.b);
        let (hi, lo) = (mean + radius, mean - radius);
        // Axis at angle phi carries eigenvalue `hi`, i.e. the shorter semi-axis.
        let phi = 0.5 * self.b.atan2(self.a - self.c);
        let minor = (-f0 / hi).sqrt();
        let major = (-f0 / lo).sqrt();
        Some((major, minor, phi + std::f64::consts::FRAC_PI_2))
    }

    /// `n` points evenly spaced in the eccentric anomaly around an ellipse.
    pub fn sample(&self, n: usize) -> Option<Vec<(f64, f64)>> {
        let (u0, v0) = self.center()?;
        let (major, minor, angle) = self.ellipse_axes()?;
        let (s, c) = angle.sin_cos();
        Some(
            (0..n)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / n as f64;
                    let (x, y) = (major * t.cos(), minor * t.sin());
                    (u0 + x * c - y * s, v0 + x * s + y * c)
                })
                .collect(),
        )
    }
}

/// Boundary between zones `m` and `m + 1` (excess path `m·λ/2`) intersected
/// with `frame`, expressed in the frame's `(u, v)` coordinates.
pub fn zone_boundary_conic(tx: Point3, rx: Point3, frame: &PlaneFrame, m: u64, wavelength: f64) -> Result<ConicSection> {
    if m == 0 {
        return Err(Error::InvalidParameter("zone index must be >= 1".into()));
    }
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::InvalidParameter(format!("wavelength {wavelength} must be positive")));
    }
    let los = focal_distance(tx, rx)?;
    let focal_half = los / 2.0;
    let a_minus_c = m as f64 * wavelength / 4.0;
    let semi_major = focal_half + a_minus_c;
    let semi_minor_sq = a_minus_c * (semi_major + focal_half);
    let k = (focal_half / semi_major).powi(2);

    // Scaled quadratic form: |w|² − k·(w·axis)² − b² = 0 with w = p − midpoint.
    let axis = (rx - tx) * (1.0 / los);
    let w = frame.center() - tx.midpoint(&rx);
    let (u, v) = (frame.u_axis(), frame.v_axis());
    let (ue, ve, we) = (u.dot(&axis), v.dot(&axis), w.dot(&axis));

    Ok(ConicSection::new(
        1.0 - k * ue * ue,
        2.0 * (u.dot(&v) - k * ue * ve),
        1.0 - k * ve * ve,
        2.0 * (u.dot(&w) - k * ue * we),
        2.0 * (v.dot(&w) - k * ve * we),
        w.dot(&w) - k * we * we - semi_minor_sq,
    ))
}

/// Zone boundary `m` under the far-field linearization: a straight line
/// `δ_center + du·u + dv·v = m·λ/2`.
pub fn far_field_boundary_conic(tx: Point3, rx: Point3, frame: &PlaneFrame, m: u64, wavelength: f64) -> Result<ConicSection> {
    if m == 0 {
        return Err(Error::InvalidParameter("zone index must be >= 1".into()));
    }
    let center_excess = excess_path(tx, rx, frame.center())?;
    let (du, dv) = far_field_plane_gradient(tx, rx, frame)?;
    Ok(ConicSection::new(
        0.0,
        0.0,
        0.0,
        du,
        dv,
        center_excess - m as f64 * wavelength / 2.0,
    ))
}

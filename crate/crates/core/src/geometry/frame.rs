use crate::error::{Error, Result};
use crate::geometry::vector::{Point3, Vec3, Vector3};

const ORTHONORMAL_TOL: f64 = 1e-12;

/// Oriented plane: a center and a right-handed orthonormal basis with
/// `normal = u_axis × v_axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFrame {
    center: Point3,
    u_axis: Vector3,
    v_axis: Vector3,
    normal: Vector3,
}

impl PlaneFrame {
    /// Builds a frame from explicit in-plane axes, which must already be
    /// orthonormal.
    pub fn new(center: Point3, u_axis: Vector3, v_axis: Vector3) -> Result<Self> {
        if !(center.is_finite() && u_axis.is_finite() && v_axis.is_finite()) {
            return Err(Error::NonFinite("plane frame"));
        }
        let frame = Self {
            center,
            u_axis,
            v_axis,
            normal: u_axis.cross(&v_axis),
        };
        frame.check()?;
        Ok(frame)
    }

    /// Builds a frame whose normal is `normal` and whose u axis is the
    /// component of `u_hint` orthogonal to it.
    pub fn from_normal(center: Point3, normal: Vector3, u_hint: Vector3) -> Result<Self> {
        let n = normal
            .normalized()
            .ok_or_else(|| Error::InvalidFrame("zero normal".into()))?;
        let u = (u_hint - n * u_hint.dot(&n))
            .normalized()
            .ok_or_else(|| Error::InvalidFrame("u hint parallel to normal".into()))?;
        let v = n.cross(&u);
        Self::new(center, u, v)
    }

    /// Default RIS orientation: the normal bisects the unit directions from
    /// `center` toward `tx` and `rx`; the u axis is the global x axis made
    /// orthogonal to the normal (global y when x is parallel to it).
    pub fn bisector(center: Point3, tx: Point3, rx: Point3) -> Result<Self> {
        let to_tx = (tx - center)
            .normalized()
            .ok_or_else(|| Error::InvalidFrame("tx at plane center".into()))?;
        let to_rx = (rx - center)
            .normalized()
            .ok_or_else(|| Error::InvalidFrame("rx at plane center".into()))?;
        let normal = (to_tx + to_rx)
            .normalized()
            .ok_or_else(|| Error::InvalidFrame("tx and rx on opposite rays".into()))?;
        let hint = if (Vec3::X - normal * normal.x).norm() > 1e-6 {
            Vec3::X
        } else {
            Vec3::Y
        };
        Self::from_normal(center, normal, hint)
    }

    fn check(&self) -> Result<()> {
        for (name, a) in [("u", self.u_axis), ("v", self.v_axis), ("normal", self.normal)] {
            if (a.norm() - 1.0).abs() > ORTHONORMAL_TOL {
                return Err(Error::InvalidFrame(format!("{name} axis is not unit length")));
            }
        }
        let dots = [
            self.u_axis.dot(&self.v_axis),
            self.u_axis.dot(&self.normal),
            self.v_axis.dot(&self.normal),
        ];
        if dots.iter().any(|d| d.abs() > ORTHONORMAL_TOL) {
            return Err(Error::InvalidFrame("axes are not orthogonal".into()));
        }
        Ok(())
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    pub fn u_axis(&self) -> Vector3 {
        self.u_axis
    }

    pub fn v_axis(&self) -> Vector3 {
        self.v_axis
    }

    pub fn normal(&self) -> Vector3 {
        self.normal
    }

    /// Point at plane coordinates `(u, v)`.
    pub fn point(&self, u: f64, v: f64) -> Point3 {
        self.center + self.u_axis * u + self.v_axis * v
    }

    /// Plane coordinates of the orthogonal projection of `q`.
    pub fn coordinates(&self, q: Point3) -> (f64, f64) {
        let d = q - self.center;
        (d.dot(&self.u_axis), d.dot(&self.v_axis))
    }

    pub fn signed_distance(&self, q: Point3) -> f64 {
        (q - self.center).dot(&self.normal)
    }

    /// Same frame translated by `offset`.
    pub fn translated(&self, offset: Vector3) -> Self {
        Self {
            center: self.center + offset,
            ..*self
        }
    }
}

/// Uniform rectangular RIS: `nx × ny` elements at `spacing` meters,
/// centered on the frame origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisGeometry {
    frame: PlaneFrame,
    nx: usize,
    ny: usize,
    spacing: f64,
}

impl RisGeometry {
    pub fn new(frame: PlaneFrame, nx: usize, ny: usize, spacing: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidGrid(format!("element counts {nx} x {ny} must be positive")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        Ok(Self {
            frame,
            nx,
            ny,
            spacing,
        })
    }

    pub fn frame(&self) -> &PlaneFrame {
        &self.frame
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of element `(i, j)`; `i` is the slow (row) index.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Inverse of [`RisGeometry::index`].
    pub fn grid_coords(&self, index: usize) -> (usize, usize) {
        (index / self.ny, index % self.ny)
    }

    /// In-plane coordinates of element `(i, j)`.
    pub fn element_plane_coords(&self, i: usize, j: usize) -> (f64, f64) {
        let u = (i as f64 - (self.nx as f64 - 1.0) / 2.0) * self.spacing;
        let v = (j as f64 - (self.ny as f64 - 1.0) / 2.0) * self.spacing;
        (u, v)
    }

    pub fn element_position(&self, i: usize, j: usize) -> Point3 {
        let (u, v) = self.element_plane_coords(i, j);
        self.frame.point(u, v)
    }

    /// Side lengths of the aperture spanned by the element centers.
    pub fn extent(&self) -> (f64, f64) {
        (
            (self.nx as f64 - 1.0) * self.spacing,
            (self.ny as f64 - 1.0) * self.spacing,
        )
    }

    /// Diagonal between the outermost element centers.
    pub fn aperture_diagonal(&self) -> f64 {
        let (w, h) = self.extent();
        w.hypot(h)
    }
}

/// All element positions in row-major order (`i` slow, `j` fast).
pub fn element_positions(geom: &RisGeometry) -> Vec<Point3> {
    let mut out = Vec::with_capacity(geom.len());
    for i in 0..geom.nx {
        for j in 0..geom.ny {
            out.push(geom.element_position(i, j));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_frame() -> PlaneFrame {
        PlaneFrame::new(Vec3::ZERO, Vec3::X, Vec3::Y).unwrap()
    }

    #[test]
    fn single_element_sits_at_center() {
        let c = Vec3::new(1.0, -2.0, 3.5);
        let geom = RisGeometry::new(unit_frame().translated(c), 1, 1, 0.37).unwrap();
        assert_eq!(element_positions(&geom), vec![c]);
    }

    #[test]
    fn two_elements_straddle_center() {
        let c = Vec3::new(0.5, 0.25, -1.0);
        let s = 0.01;
        let geom = RisGeometry::new(unit_frame().translated(c), 2, 1, s).unwrap();
        let p = element_positions(&geom);
        assert_eq!(p, vec![c - Vec3::X * (s / 2.0), c + Vec3::X * (s / 2.0)]);
    }

    #[test]
    fn row_major_order() {
        let geom = RisGeometry::new(unit_frame(), 3, 2, 1.0).unwrap();
        let p = element_positions(&geom);
        assert_eq!(p.len(), 6);
        assert_eq!(p[geom.index(2, 1)], geom.element_position(2, 1));
        assert_eq!(geom.grid_coords(5), (2, 1));
        assert_eq!(p[1], Vec3::new(-1.0, 0.5, 0.0));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RisGeometry::new(unit_frame(), 0, 4, 1.0).is_err());
        assert!(RisGeometry::new(unit_frame(), 4, 4, 0.0).is_err());
        assert!(RisGeometry::new(unit_frame(), 4, 4, -1.0).is_err());
        assert!(RisGeometry::new(unit_frame(), 4, 4, f64::NAN).is_err());
    }

    #[test]
    fn rejects_non_orthonormal_axes() {
        assert!(PlaneFrame::new(Vec3::ZERO, Vec3::X, Vec3::X).is_err());
        assert!(PlaneFrame::new(Vec3::ZERO, Vec3::X * 2.0, Vec3::Y).is_err());
        assert!(PlaneFrame::new(Vec3::ZERO, Vec3::X, Vec3::new(0.1, 1.0, 0.0)).is_err());
    }

    #[test]
    fn bisector_faces_both_terminals() {
        let tx = Vec3::new(0.0, 12.0, 0.0);
        let rx = Vec3::new(5.0, 0.0, 0.0);
        let f = PlaneFrame::bisector(Vec3::ZERO, tx, rx).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((f.normal() - Vec3::new(s, s, 0.0)).norm() < 1e-15);
        assert!((f.u_axis() - Vec3::new(s, -s, 0.0)).norm() < 1e-15);
        assert!((f.u_axis().cross(&f.v_axis()) - f.normal()).norm() < 1e-15);
        assert!(f.signed_distance(tx) > 0.0 && f.signed_distance(rx) > 0.0);
    }

    #[test]
    fn bisector_falls_back_when_normal_is_x() {
        let f = PlaneFrame::bisector(Vec3::ZERO, Vec3::new(3.0, 1.0, 0.0), Vec3::new(3.0, -1.0, 0.0))
            .unwrap();
        assert!((f.normal() - Vec3::X).norm() < 1e-15);
        assert!((f.u_axis() - Vec3::Y).norm() < 1e-15);
    }

    #[test]
    fn coordinates_invert_point() {
        let f = PlaneFrame::from_normal(Vec3::new(1.0, 2.0, 3.0), Vec3::new(1.0, 2.0, -0.5), Vec3::Z)
            .unwrap();
        let (u, v) = f.coordinates(f.point(0.3, -1.7));
        assert!((u - 0.3).abs() < 1e-14 && (v + 1.7).abs() < 1e-14);
    }
}

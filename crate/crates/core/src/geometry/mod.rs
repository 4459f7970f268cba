//! Geometric kernels: element placement, Fresnel excess paths and zones,
//! ellipsoid–plane intersections and the far-field linearization.

mod conic;
mod frame;
mod fresnel;
mod vector;

pub use conic::{far_field_boundary_conic, zone_boundary_conic, ConicKind, ConicSection, CLASSIFY_TOL};
pub use frame::{element_positions, PlaneFrame, RisGeometry};
pub use fresnel::{
    build_far_field_map, build_fresnel_map, excess_path, far_field_excess_path, far_field_plane_gradient,
    fraunhofer_distance, wavelength, zone_of, FresnelMap, MIN_FOCAL_DISTANCE, PLANE_TOLERANCE, SPEED_OF_LIGHT,
};
pub use vector::{Point3, Vec3, Vector3};

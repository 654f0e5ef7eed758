//! Vector math, ray casting against primitive scenes, segment visibility and
//! the closed-form ellipsoid range inversion.

mod ellipsoid;
mod primitive;
mod scene;
mod vec3;

pub use ellipsoid::{ellipsoid_depth, DEGENERATE_DENOMINATOR};
pub use primitive::{Material, Primitive, Ray, Shape, Span};
pub use scene::{
    Hit, Room, Scene, SurfaceId, Wall, COPLANAR_TOLERANCE, DEFAULT_MAX_PRIMITIVES, SHADOW_EPSILON,
};
pub use vec3::{Dir3, Mat3, Point3, Vec3};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

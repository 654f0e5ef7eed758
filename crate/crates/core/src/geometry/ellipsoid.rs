use super::vec3::{Dir3, Point3};
use crate::error::{Error, Result};

/// Smallest admissible `|L' - dir.(focus - origin)|`.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-9;

/// Range along a pixel ray to the point whose summed distance to `focus`
/// and to the ray origin equals `path`.
///
/// `path` is the pathlength after the known leg to `focus` has been
/// removed (for two-bounce light, the laser-to-spot leg). The point lies at
/// `origin + t dir` with
///
/// `t = (path^2 - |w|^2) / (2 (path - dir.w))`, `w = focus - origin`.
pub fn ellipsoid_depth(path: f64, focus: Point3, origin: Point3, dir: Dir3) -> Result<f64> {
    let w = focus - origin;
    let w2 = w.norm_squared();
    let denom = path - dir.dot(w);
    if !(denom.abs() > DEGENERATE_DENOMINATOR) {
        return Err(Error::DegenerateGeometry);
    }
    // Pathlength shorter than the focal distance admits no ellipsoid.
    if path * path < w2 {
        return Err(Error::NoSolution);
    }
    let t = (path * path - w2) / (2.0 * denom);
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NoSolution);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    #[test]
    fn off_axis_focus() {
        let t = ellipsoid_depth(
            2.0 + 2f64.sqrt(),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::ZERO,
            Dir3::Z,
        )
        .unwrap();
        assert!((t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn confocal() {
        let dir = Dir3::new(Vec3::new(0.2, -0.4, 0.9)).unwrap();
        let t = ellipsoid_depth(4.0, Vec3::ZERO, Vec3::ZERO, dir).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn focus_on_ray_in_front() {
        let t = ellipsoid_depth(3.0, Vec3::new(0.0, 0.0, 1.0), Vec3::ZERO, Dir3::Z).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn focus_on_ray_with_minimal_path_is_degenerate() {
        let r = ellipsoid_depth(1.0, Vec3::new(0.0, 0.0, 1.0), Vec3::ZERO, Dir3::Z);
        assert!(matches!(r, Err(Error::DegenerateGeometry)));
    }

    #[test]
    fn path_shorter_than_focal_distance() {
        let r = ellipsoid_depth(0.5, Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO, Dir3::Z);
        assert!(matches!(r, Err(Error::NoSolution)));
    }
}

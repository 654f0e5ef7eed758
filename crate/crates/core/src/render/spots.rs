use super::rig::LidarRig;
use crate::error::{Error, Result};
use crate::geometry::{Dir3, Material, Point3, Ray, Scene};
use serde::{Deserialize, Serialize};

/// Offset applied to rays leaving a mirror so they do not re-hit it.
const BOUNCE_OFFSET: f64 = 1e-9;

/// Diffuse point re-radiating laser light into the scene.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirtualSource {
    pub point: Point3,
    /// Surface normal on the side the laser light arrives from.
    pub normal: Dir3,
    pub albedo: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spot {
    /// First surface hit by the laser.
    pub x_i: Point3,
    pub is_mirror: bool,
    /// Diffuse hit after reflecting off a mirror spot.
    pub virtual_x_i: Option<Point3>,
    /// Laser pathlength up to the re-radiating point, including the mirror
    /// leg for mirror spots.
    pub laser_leg: f64,
    /// Effective diffuse emitter: `x_i`, or `virtual_x_i` for mirror spots.
    pub source: VirtualSource,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpotSet {
    pub spots: Vec<Spot>,
}

impl SpotSet {
    pub fn len(&self) -> usize {
        self.spots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spots.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Spot> {
        self.spots.iter()
    }

    pub fn subset(&self, keep: &[usize]) -> SpotSet {
        SpotSet {
            spots: keep.iter().map(|&i| self.spots[i]).collect(),
        }
    }
}

impl std::ops::Index<usize> for SpotSet {
    type Output = Spot;
    fn index(&self, i: usize) -> &Spot {
        &self.spots[i]
    }
}

/// Traces every laser spot to its first surface; mirror spots are followed
/// through one specular reflection to the next diffuse surface.
pub fn trace_spots(scene: &Scene, rig: &LidarRig) -> Result<SpotSet> {
    let mut spots = Vec::with_capacity(rig.spot_count());
    for (i, &dir) in rig.spot_dirs.iter().enumerate() {
        let hit = scene
            .intersect_ray(&Ray::new(rig.laser, dir))
            .ok_or_else(|| Error::RendererIntegrity(format!("spot {i} escapes the room")))?;
        let spot = match hit.material {
            Material::Diffuse { albedo } => Spot {
                x_i: hit.point,
                is_mirror: false,
                virtual_x_i: None,
                laser_leg: hit.distance,
                source: VirtualSource {
                    point: hit.point,
                    normal: hit.normal,
                    albedo,
                },
            },
            Material::Mirror => {
                let reflected = dir.reflect(hit.normal);
                let ray = Ray::with_range(hit.point, reflected, BOUNCE_OFFSET, f64::INFINITY);
                let next = scene.intersect_ray(&ray).ok_or_else(|| {
                    Error::RendererIntegrity(format!("reflection of spot {i} escapes the room"))
                })?;
                let Material::Diffuse { albedo } = next.material else {
                    return Err(Error::RendererIntegrity(format!(
                        "reflection of spot {i} meets a second mirror"
                    )));
                };
                Spot {
                    x_i: hit.point,
                    is_mirror: true,
                    virtual_x_i: Some(next.point),
                    laser_leg: hit.distance + next.distance,
                    source: VirtualSource {
                        point: next.point,
                        normal: next.normal,
                        albedo,
                    },
                }
            }
        };
        if !(spot.laser_leg > 0.0) {
            return Err(Error::RendererIntegrity(format!(
                "spot {i} has a zero-length laser leg"
            )));
        }
        spots.push(spot);
    }
    Ok(SpotSet { spots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Mat3, Primitive, Room, Shape, Vec3};
    use crate::render::rig::Camera;

    fn rig_with(dirs: Vec<Dir3>) -> LidarRig {
        let cam = Camera::new(Vec3::ZERO, Mat3::IDENTITY, 90.0, 8, 8);
        let n = dirs.len();
        LidarRig::new(cam, Vec3::ZERO, (n, 1), dirs).unwrap()
    }

    #[test]
    fn spot_on_wall() {
        let scene = Scene::empty(Room::new(
            Vec3::new(-2.0, -2.0, -1.0),
            Vec3::new(2.0, 2.0, 3.0),
            [0.5; 6],
        ));
        let spots = trace_spots(&scene, &rig_with(vec![Dir3::Z])).unwrap();
        assert_eq!(spots.len(), 1);
        assert_eq!(spots[0].x_i, Vec3::new(0.0, 0.0, 3.0));
        assert_eq!(spots[0].laser_leg, 3.0);
        assert!(!spots[0].is_mirror);
    }

    #[test]
    fn mirror_spot_continues_to_mirror_image() {
        let room = Room::cube(Vec3::ZERO, 4.0, 0.5);
        let mirror = Primitive::new(
            Shape::Panel {
                center: Vec3::new(0.0, 0.0, 2.0),
                normal: Dir3::NEG_Z,
                u_axis: Dir3::X,
                half_u: 1.0,
                half_v: 1.0,
            },
            Material::Mirror,
        );
        let scene = Scene::new(room, vec![mirror]).unwrap();
        // 45 degrees onto the back-wall mirror.
        let dir = Dir3::new(Vec3::new(1.0, 0.0, 1.0)).unwrap();
        let rig = LidarRig::new(
            Camera::new(Vec3::ZERO, Mat3::IDENTITY, 90.0, 8, 8),
            Vec3::new(-1.0, 0.0, 1.0),
            (1, 1),
            vec![dir],
        )
        .unwrap();
        let spot = trace_spots(&scene, &rig).unwrap()[0];
        assert!(spot.is_mirror);
        assert!((spot.x_i - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-12);
        // Unfolded ray: continue straight through the mirror plane to the
        // reflected room, then mirror the hit back across z = 2.
        let unfolded_hit = Vec3::new(2.0, 0.0, 4.0);
        let expected = Vec3::new(unfolded_hit.x, unfolded_hit.y, 4.0 - unfolded_hit.z);
        let v = spot.virtual_x_i.unwrap();
        assert!((v - expected).norm() < 1e-9, "{v:?}");
        assert!((spot.laser_leg - (unfolded_hit - rig.laser).norm()).abs() < 1e-9);
    }
}

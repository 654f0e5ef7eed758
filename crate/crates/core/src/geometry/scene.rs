use super::primitive::{Material, Primitive, Ray, Shape};
use super::vec3::{Dir3, Point3, Vec3};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Segment endpoints are pulled in by this much in [`Scene::visible`].
pub const SHADOW_EPSILON: f64 = 1e-6;

/// Coplanarity tolerance between a wall and a panel mounted on it.
pub const COPLANAR_TOLERANCE: f64 = 1e-6;

pub const DEFAULT_MAX_PRIMITIVES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    NegX,
    PosX,
    NegY,
    PosY,
    NegZ,
    PosZ,
}

impl Wall {
    pub const ALL: [Wall; 6] = [
        Wall::NegX,
        Wall::PosX,
        Wall::NegY,
        Wall::PosY,
        Wall::NegZ,
        Wall::PosZ,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn axis(self) -> usize {
        self.index() / 2
    }

    pub fn is_max_side(self) -> bool {
        self.index() % 2 == 1
    }

    /// Normal pointing into the room.
    pub fn inward_normal(self) -> Dir3 {
        match self {
            Wall::NegX => Dir3::X,
            Wall::PosX => Dir3::NEG_X,
            Wall::NegY => Dir3::Y,
            Wall::PosY => Dir3::NEG_Y,
            Wall::NegZ => Dir3::Z,
            Wall::PosZ => Dir3::NEG_Z,
        }
    }

    /// The two world axes spanning the wall plane, in cyclic order.
    pub fn tangent_axes(self) -> (usize, usize) {
        let k = self.axis();
        ((k + 1) % 3, (k + 2) % 3)
    }
}

/// Interior of an axis-aligned room. Walls are diffuse with per-wall albedo
/// indexed like [`Wall::ALL`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub min: Point3,
    pub max: Point3,
    pub albedo: [f64; 6],
}

impl Room {
    pub fn new(min: Point3, max: Point3, albedo: [f64; 6]) -> Room {
        Room { min, max, albedo }
    }

    /// Cube of side `size` centered at `center`, uniform albedo.
    pub fn cube(center: Point3, size: f64, albedo: f64) -> Room {
        let h = Vec3::new(size, size, size) * 0.5;
        Room::new(center - h, center + h, [albedo; 6])
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn wall_coordinate(&self, wall: Wall) -> f64 {
        if wall.is_max_side() {
            self.max[wall.axis()]
        } else {
            self.min[wall.axis()]
        }
    }

    pub fn contains(&self, p: Point3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn strictly_contains(&self, p: Point3) -> bool {
        (0..3).all(|k| p[k] > self.min[k] && p[k] < self.max[k])
    }

    /// Exit point of a ray starting inside the room.
    fn exit(&self, ray: &Ray) -> Option<(f64, Wall)> {
        let mut best: Option<(f64, Wall)> = None;
        for k in 0..3 {
            let d = ray.dir[k];
            if d == 0.0 {
                continue;
            }
            let wall = if d > 0.0 {
                Wall::ALL[2 * k + 1]
            } else {
                Wall::ALL[2 * k]
            };
            let t = (self.wall_coordinate(wall) - ray.origin[k]) / d;
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, wall));
            }
        }
        best.filter(|&(t, _)| t >= ray.t_min && t <= ray.t_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SurfaceId {
    Object(usize),
    Wall(Wall),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub point: Point3,
    /// Faces against the incoming ray.
    pub normal: Dir3,
    pub distance: f64,
    pub material: Material,
    pub surface: SurfaceId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub room: Room,
    pub objects: Vec<Primitive>,
}

impl Scene {
    pub fn new(room: Room, objects: Vec<Primitive>) -> Result<Scene> {
        Scene::with_limit(room, objects, DEFAULT_MAX_PRIMITIVES)
    }

    pub fn with_limit(room: Room, objects: Vec<Primitive>, max_primitives: usize) -> Result<Scene> {
        let scene = Scene { room, objects };
        scene.validate(max_primitives)?;
        Ok(scene)
    }

    pub fn empty(room: Room) -> Scene {
        Scene {
            room,
            objects: Vec::new(),
        }
    }

    pub fn validate(&self, max_primitives: usize) -> Result<()> {
        let room = &self.room;
        if !(0..3).all(|k| room.max[k] > room.min[k])
            || !room.min.is_finite()
            || !room.max.is_finite()
        {
            return Err(Error::InvalidScene("room extents must be positive".into()));
        }
        if let Some(a) = room.albedo.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(Error::InvalidScene(format!(
                "wall albedo {a} outside (0, 1]"
            )));
        }
        if self.objects.len() > max_primitives {
            return Err(Error::InvalidScene(format!(
                "{} primitives exceeds the limit of {max_primitives}",
                self.objects.len()
            )));
        }
        for (i, obj) in self.objects.iter().enumerate() {
            obj.validate()
                .map_err(|e| Error::InvalidScene(format!("object {i}: {e}")))?;
            let (lo, hi) = obj.shape.bounds();
            match obj.shape {
                Shape::Panel { center, normal, .. } => {
                    if self.mounting_wall(center, normal).is_none() {
                        return Err(Error::InvalidScene(format!(
                            "panel {i} is not flush with a wall"
                        )));
                    }
                    if !(room.contains(lo) && room.contains(hi)) {
                        return Err(Error::InvalidScene(format!(
                            "panel {i} extends past its wall"
                        )));
                    }
                }
                _ => {
                    if !(room.strictly_contains(lo) && room.strictly_contains(hi)) {
                        return Err(Error::InvalidScene(format!(
                            "object {i} is not strictly inside the room"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Wall a panel is flush against, if any.
    pub fn mounting_wall(&self, center: Point3, normal: Dir3) -> Option<Wall> {
        Wall::ALL.into_iter().find(|&w| {
            (center[w.axis()] - self.room.wall_coordinate(w)).abs() <= COPLANAR_TOLERANCE
                && normal[w.axis()].abs() > 1.0 - 1e-9
        })
    }

    pub fn has_mirror(&self) -> bool {
        self.objects.iter().any(|o| o.material.is_mirror())
    }

    pub fn material_of(&self, surface: SurfaceId) -> Material {
        match surface {
            SurfaceId::Object(i) => self.objects[i].material,
            SurfaceId::Wall(w) => Material::Diffuse {
                albedo: self.room.albedo[w.index()],
            },
        }
    }

    /// Nearest surface along `ray` within `[t_min, t_max]`.
    ///
    /// Objects are tested in list order and a later object replaces the
    /// current best only when strictly nearer, so coincident surfaces resolve
    /// to the lowest index. Room walls come after every object; a wall loses
    /// to an object lying within [`COPLANAR_TOLERANCE`] behind it, which keeps
    /// wall-mounted panels visible.
    pub fn intersect_ray(&self, ray: &Ray) -> Option<Hit> {
        let d = ray.dir.get();
        let mut best: Option<(f64, Vec3, usize)> = None;
        for (i, obj) in self.objects.iter().enumerate() {
            let Some(span) = obj.shape.span(ray.origin, d) else {
                continue;
            };
            let (t, n) = if span.t0 >= ray.t_min {
                (span.t0, span.n0)
            } else if span.t1 >= ray.t_min {
                (span.t1, span.n1)
            } else {
                continue;
            };
            if t > ray.t_max {
                continue;
            }
            if best.is_none_or(|(bt, _, _)| t < bt) {
                best = Some((t, n, i));
            }
        }

        let wall = self.room.exit(ray);
        let (t, n, surface) = match (best, wall) {
            (Some((bt, bn, i)), Some((wt, _))) if bt <= wt + COPLANAR_TOLERANCE => {
                (bt, bn, SurfaceId::Object(i))
            }
            (_, Some((wt, w))) => (wt, w.inward_normal().get(), SurfaceId::Wall(w)),
            (Some((bt, bn, i)), None) => (bt, bn, SurfaceId::Object(i)),
            (None, None) => return None,
        };
        let n = if n.dot(d) > 0.0 { -n } else { n };
        let normal = Dir3::new(n).unwrap_or(ray.dir.flipped());
        Some(Hit {
            point: ray.at(t),
            normal,
            distance: t,
            material: self.material_of(surface),
            surface,
        })
    }

    /// True iff the open segment between `a` and `b` crosses no object.
    /// Both endpoints are pulled in by [`SHADOW_EPSILON`]; walls never block
    /// because the room is convex.
    pub fn visible(&self, a: Point3, b: Point3) -> Result<bool> {
        let delta = b - a;
        let len = delta.norm();
        if !(len > 1e-12) {
            return Err(Error::DegenerateSegment);
        }
        let lo = SHADOW_EPSILON;
        let hi = len - SHADOW_EPSILON;
        if hi <= lo {
            return Ok(true);
        }
        let d = delta / len;
        Ok(!self.objects.iter().any(|obj| match obj.shape.span(a, d) {
            Some(s) => s.t1 > lo && s.t0 < hi,
            None => false,
        }))
    }
}

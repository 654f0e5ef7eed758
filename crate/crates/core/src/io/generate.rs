use super::spec::{MirrorSpec, RigSpec, SceneSpec};
use crate::error::{Error, Result};
use crate::geometry::{Dir3, Mat3, Material, Primitive, Room, Shape, Vec3, Wall};
use crate::render::Camera;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type Range = (f64, f64);

/// Sampling ranges for procedural rooms, meters unless noted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub width: Range,
    pub height: Range,
    pub depth: Range,
    pub wall_albedo: Range,
    pub object_albedo: Range,
    pub cube_size: Range,
    pub cylinder_radius: Range,
    pub cylinder_height: Range,
    pub mirror_half_extent: Range,
    pub include_cube: bool,
    pub include_cylinder: bool,
    pub include_mirror: bool,
    /// Objects start at least this far in front of the near wall.
    pub min_object_z: f64,
    /// Clearance kept between objects, walls and mirrors.
    pub clearance: f64,
    pub max_attempts: usize,
    pub fov_deg: f64,
    pub resolution: (usize, usize),
    pub spot_grid: (usize, usize),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            width: (2.5, 4.0),
            height: (2.4, 3.2),
            depth: (3.0, 4.5),
            wall_albedo: (0.4, 0.9),
            object_albedo: (0.3, 0.9),
            cube_size: (0.3, 0.7),
            cylinder_radius: (0.1, 0.3),
            cylinder_height: (0.4, 1.2),
            mirror_half_extent: (0.3, 0.6),
            include_cube: true,
            include_cylinder: true,
            include_mirror: true,
            min_object_z: 1.2,
            clearance: 0.05,
            max_attempts: 200,
            fov_deg: 90.0,
            resolution: (64, 64),
            spot_grid: (5, 5),
        }
    }
}

impl GeneratorConfig {
    pub fn without_mirror(self) -> GeneratorConfig {
        GeneratorConfig {
            include_mirror: false,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("width", self.width),
            ("height", self.height),
            ("depth", self.depth),
            ("wall_albedo", self.wall_albedo),
            ("object_albedo", self.object_albedo),
            ("cube_size", self.cube_size),
            ("cylinder_radius", self.cylinder_radius),
            ("cylinder_height", self.cylinder_height),
            ("mirror_half_extent", self.mirror_half_extent),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "range {name} = ({lo}, {hi}) is degenerate"
                )));
            }
        }
        if self.wall_albedo.1 > 1.0 || self.object_albedo.1 > 1.0 {
            return Err(Error::InvalidInput(
                "albedo ranges must lie in (0, 1]".into(),
            ));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidInput("max_attempts must be positive".into()));
        }
        Ok(())
    }
}

fn sample(rng: &mut ChaCha8Rng, (lo, hi): Range) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn overlaps(a: (Vec3, Vec3), b: (Vec3, Vec3), gap: f64) -> bool {
    (0..3).all(|k| a.0[k] < b.1[k] + gap && b.0[k] < a.1[k] + gap)
}

/// Camera near the middle of the near wall looking down +z, with the laser
/// slightly to its side.
pub fn default_rig(room: &Room, cfg: &GeneratorConfig) -> RigSpec {
    let h = room.max.y - room.min.y;
    let position = Vec3::new(
        0.5 * (room.min.x + room.max.x),
        room.min.y + 0.5 * h,
        room.min.z + 0.25,
    );
    let rotation = Mat3::look_along(Vec3::Z, Vec3::Y).expect("axis-aligned view");
    RigSpec {
        camera: Camera::new(
            position,
            rotation,
            cfg.fov_deg,
            cfg.resolution.0,
            cfg.resolution.1,
        ),
        laser: position + Vec3::new(0.1, 0.0, 0.0),
        spot_grid: [cfg.spot_grid.0, cfg.spot_grid.1],
    }
}

/// Uniform draw from `[lo, hi)`; an empty range yields `lo` and leaves the
/// fit check to reject the placement.
fn span(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Random room with a cube, an upright cylinder and a wall mirror,
/// deterministic in `seed`. Overlapping placements are redrawn up to
/// `max_attempts` times.
pub fn generate_scene(seed: u64, cfg: &GeneratorConfig) -> Result<SceneSpec> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h, d) = (
        sample(&mut rng, cfg.width),
        sample(&mut rng, cfg.height),
        sample(&mut rng, cfg.depth),
    );
    let mut albedo = [0.0; 6];
    for a in &mut albedo {
        *a = sample(&mut rng, cfg.wall_albedo);
    }
    let room = Room::new(
        Vec3::new(-0.5 * w, 0.0, 0.0),
        Vec3::new(0.5 * w, h, d),
        albedo,
    );
    let gap = cfg.clearance;
    let mut objects: Vec<Primitive> = Vec::new();

    let mut place = |make: &mut dyn FnMut(&mut ChaCha8Rng) -> Primitive,
                     what: &str,
                     objects: &mut Vec<Primitive>| {
        for _ in 0..cfg.max_attempts {
            let p = make(&mut rng);
            let b = p.shape.bounds();
            let inside = (0..3).all(|k| b.0[k] > room.min[k] + gap && b.1[k] < room.max[k] - gap)
                && b.0.z >= cfg.min_object_z;
            if inside && !objects.iter().any(|o| overlaps(o.shape.bounds(), b, gap)) {
                objects.push(p);
                return Ok(());
            }
        }
        Err(Error::PlacementFailed {
            attempts: cfg.max_attempts,
            constraint: format!("{what} must fit inside the room without overlap"),
        })
    };

    if cfg.include_cube {
        let mut make = |rng: &mut ChaCha8Rng| {
            let s = sample(rng, cfg.cube_size);
            let x = span(rng, -0.5 * w, 0.5 * w - s);
            let z = span(rng, cfg.min_object_z, d - s);
            let y = span(rng, 0.0, h - s) * 0.5;
            let albedo = sample(rng, cfg.object_albedo);
            Primitive::diffuse_box(
                Vec3::new(x, y + gap, z),
                Vec3::new(x + s, y + gap + s, z + s),
                albedo,
            )
        };
        place(&mut make, "cube", &mut objects)?;
    }
    if cfg.include_cylinder {
        let mut make = |rng: &mut ChaCha8Rng| {
            let r = sample(rng, cfg.cylinder_radius);
            let height = sample(rng, cfg.cylinder_height);
            let x = rng.random_range(-0.5 * w..0.5 * w);
            let z = span(rng, cfg.min_object_z, d);
            let albedo = sample(rng, cfg.object_albedo);
            let shape = Shape::Cylinder {
                base: Vec3::new(x, 2.0 * gap, z),
                axis: Dir3::Y,
                radius: r,
                height,
            };
            Primitive::new(shape, Material::Diffuse { albedo })
        };
        place(&mut make, "cylinder", &mut objects)?;
    }

    let mut mirrors = Vec::new();
    if cfg.include_mirror {
        let walls = [Wall::NegX, Wall::PosX, Wall::PosZ];
        let mut placed = false;
        for _ in 0..cfg.max_attempts {
            let wall = walls[rng.random_range(0..walls.len())];
            let (a, b) = wall.tangent_axes();
            let half = [
                sample(&mut rng, cfg.mirror_half_extent),
                sample(&mut rng, cfg.mirror_half_extent),
            ];
            let mut center = [0.0; 2];
            let mut fits = true;
            for (i, axis) in [a, b].into_iter().enumerate() {
                let lo = room.min[axis] + half[i] + gap;
                let hi = room.max[axis] - half[i] - gap;
                // Keep side mirrors beyond the camera so they are in view.
                let lo = if axis == 2 {
                    lo.max(cfg.min_object_z)
                } else {
                    lo
                };
                if !(hi > lo) {
                    fits = false;
                    break;
                }
                center[i] = rng.random_range(lo..hi);
            }
            if !fits {
                continue;
            }
            let m = MirrorSpec {
                wall,
                center,
                half_extents: half,
            };
            let b = m.primitive(&room).shape.bounds();
            if !objects.iter().any(|o| overlaps(o.shape.bounds(), b, gap)) {
                mirrors.push(m);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::PlacementFailed {
                attempts: cfg.max_attempts,
                constraint: "mirror must fit on a wall without touching an object".into(),
            });
        }
    }

    let rig = default_rig(&room, cfg);
    let spec = SceneSpec {
        seed,
        room,
        objects,
        mirrors,
        rig,
    };
    spec.build()?;
    Ok(spec)
}

/// Fixed scene with a cube hidden from the sensor behind a larger occluder.
/// The hidden cube is object [`HIDDEN_CUBE_INDEX`].
pub fn hidden_cube_scene(resolution: usize, spot_grid: usize) -> SceneSpec {
    let room = Room::new(
        Vec3::new(-1.5, 0.0, 0.0),
        Vec3::new(1.5, 3.0, 4.0),
        [0.7; 6],
    );
    let objects = vec![
        Primitive::diffuse_box(Vec3::new(-0.4, 1.0, 1.4), Vec3::new(0.4, 2.0, 1.7), 0.6),
        Primitive::diffuse_box(Vec3::new(-0.3, 1.2, 2.3), Vec3::new(0.3, 1.8, 2.9), 0.6),
    ];
    let cfg = GeneratorConfig {
        resolution: (resolution, resolution),
        spot_grid: (spot_grid, spot_grid),
        ..Default::default()
    };
    let rig = default_rig(&room, &cfg);
    SceneSpec {
        seed: 0,
        room,
        objects,
        mirrors: Vec::new(),
        rig,
    }
}

/// Index of the hidden object in [`hidden_cube_scene`].
pub const HIDDEN_CUBE_INDEX: usize = 1;

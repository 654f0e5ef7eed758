use crate::error::{Error, Result};
use crate::geometry::{
    Dir3, Material, Point3, Primitive, Room, Scene, Shape, Vec3, Wall, DEFAULT_MAX_PRIMITIVES,
};
use crate::render::{Camera, LidarRig};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Rectangular mirror flush against a wall. `center` and `half_extents`
/// are in the wall's tangent axes ([`Wall::tangent_axes`]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorSpec {
    pub wall: Wall,
    pub center: [f64; 2],
    pub half_extents: [f64; 2],
}

impl MirrorSpec {
    pub fn primitive(&self, room: &Room) -> Primitive {
        let (a, b) = self.wall.tangent_axes();
        let center = Vec3::ZERO
            .with_axis(self.wall.axis(), room.wall_coordinate(self.wall))
            .with_axis(a, self.center[0])
            .with_axis(b, self.center[1]);
        let u_axis = Dir3::new(Vec3::ZERO.with_axis(a, 1.0)).expect("unit axis");
        let shape = Shape::Panel {
            center,
            normal: self.wall.inward_normal(),
            u_axis,
            half_u: self.half_extents[0],
            half_v: self.half_extents[1],
        };
        Primitive::new(shape, Material::Mirror)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigSpec {
    pub camera: Camera,
    pub laser: Point3,
    /// Spots per row and rows; spots are aimed at evenly spaced pixels.
    pub spot_grid: [usize; 2],
}

/// Serializable description of a scene and its capture rig.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub seed: u64,
    pub room: Room,
    #[serde(default)]
    pub objects: Vec<Primitive>,
    #[serde(default)]
    pub mirrors: Vec<MirrorSpec>,
    pub rig: RigSpec,
}

impl SceneSpec {
    /// Objects followed by mirror panels.
    pub fn scene(&self) -> Result<Scene> {
        let mut objects = self.objects.clone();
        objects.extend(self.mirrors.iter().map(|m| m.primitive(&self.room)));
        for m in &self.mirrors {
            if !(m.half_extents[0] > 0.0 && m.half_extents[1] > 0.0) {
                return Err(Error::InvalidScene(
                    "mirror extents must be positive".into(),
                ));
            }
        }
        Scene::with_limit(self.room, objects, DEFAULT_MAX_PRIMITIVES)
    }

    pub fn rig(&self, scene: &Scene) -> Result<LidarRig> {
        let cam = self.rig.camera;
        if !scene.room.strictly_contains(cam.position)
            || !scene.room.strictly_contains(self.rig.laser)
        {
            return Err(Error::InvalidRig(
                "camera and laser must be inside the room".into(),
            ));
        }
        if scene
            .objects
            .iter()
            .any(|o| o.shape.contains(cam.position) || o.shape.contains(self.rig.laser))
        {
            return Err(Error::InvalidRig("camera or laser inside an object".into()));
        }
        LidarRig::aimed_at_pixels(
            scene,
            cam,
            self.rig.laser,
            self.rig.spot_grid[0],
            self.rig.spot_grid[1],
        )
    }

    /// Builds and validates both the scene and the rig.
    pub fn build(&self) -> Result<(Scene, LidarRig)> {
        let scene = self.scene()?;
        let rig = self.rig(&scene)?;
        Ok((scene, rig))
    }

    pub fn with_resolution(mut self, n_x: usize, n_y: usize) -> SceneSpec {
        self.rig.camera.n_x = n_x;
        self.rig.camera.n_y = n_y;
        self
    }

    pub fn with_spot_grid(mut self, n_xl: usize, n_yl: usize) -> SceneSpec {
        self.rig.spot_grid = [n_xl, n_yl];
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<SceneSpec> {
        let spec: SceneSpec = serde_json::from_str(s)?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<SceneSpec> {
        SceneSpec::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

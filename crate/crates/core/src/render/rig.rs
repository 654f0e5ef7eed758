use crate::error::{Error, Result};
use crate::geometry::{Dir3, Mat3, Point3, Ray, Scene, Vec3};
use serde::{Deserialize, Serialize};

/// Pinhole camera with a horizontal field of view.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub position: Point3,
    /// Columns: camera right, up and forward axes in world coordinates.
    pub rotation: Mat3,
    pub fov_deg: f64,
    pub n_x: usize,
    pub n_y: usize,
}

impl Camera {
    pub fn new(position: Point3, rotation: Mat3, fov_deg: f64, n_x: usize, n_y: usize) -> Camera {
        Camera {
            position,
            rotation,
            fov_deg,
            n_x,
            n_y,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov_deg > 10.0 && self.fov_deg < 170.0) {
            return Err(Error::InvalidRig(format!(
                "field of view {} outside (10, 170) degrees",
                self.fov_deg
            )));
        }
        if self.n_x == 0 || self.n_y == 0 {
            return Err(Error::InvalidRig(
                "sensor must have at least one pixel".into(),
            ));
        }
        if self.rotation.orthonormality_error() > 1e-9
            || (self.rotation.determinant() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidRig(
                "camera orientation is not a rotation".into(),
            ));
        }
        if !self.position.is_finite() {
            return Err(Error::InvalidRig("camera position must be finite".into()));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.n_x * self.n_y
    }

    #[inline]
    pub fn pixel_index(&self, u: usize, v: usize) -> usize {
        v * self.n_x + u
    }

    fn tan_half(&self) -> f64 {
        (self.fov_deg.to_radians() * 0.5).tan()
    }

    fn aspect(&self) -> f64 {
        self.n_y as f64 / self.n_x as f64
    }

    /// World-space direction through the center of pixel `(u, v)`; `u` runs
    /// right along a row, `v` runs down the image.
    pub fn pixel_dir(&self, u: usize, v: usize) -> Dir3 {
        let th = self.tan_half();
        let sx = (2.0 * (u as f64 + 0.5) / self.n_x as f64 - 1.0) * th;
        let sy = (1.0 - 2.0 * (v as f64 + 0.5) / self.n_y as f64) * th * self.aspect();
        let d = self.rotation.mul_vec(Vec3::new(sx, sy, 1.0));
        Dir3::new(d).expect("pixel direction is finite and non-zero")
    }

    pub fn pixel_ray(&self, u: usize, v: usize) -> Ray {
        Ray::new(self.position, self.pixel_dir(u, v))
    }

    /// Pixel whose footprint contains the projection of `p`.
    pub fn project(&self, p: Point3) -> Option<(usize, usize)> {
        let q = self.rotation.transpose_mul_vec(p - self.position);
        if q.z <= 0.0 {
            return None;
        }
        let th = self.tan_half();
        let uc = (q.x / q.z / th + 1.0) * 0.5 * self.n_x as f64;
        let vc = (1.0 - q.y / q.z / (th * self.aspect())) * 0.5 * self.n_y as f64;
        if !(uc >= 0.0 && vc >= 0.0) {
            return None;
        }
        let (u, v) = (uc.floor() as usize, vc.floor() as usize);
        (u < self.n_x && v < self.n_y).then_some((u, v))
    }
}

/// Sensor, laser origin and the laser spot grid (row-major, `n_xl` spots
/// per row).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LidarRig {
    pub camera: Camera,
    pub laser: Point3,
    pub spot_grid: (usize, usize),
    pub spot_dirs: Vec<Dir3>,
}

impl LidarRig {
    pub fn new(
        camera: Camera,
        laser: Point3,
        spot_grid: (usize, usize),
        spot_dirs: Vec<Dir3>,
    ) -> Result<LidarRig> {
        let rig = LidarRig {
            camera,
            laser,
            spot_grid,
            spot_dirs,
        };
        rig.validate()?;
        Ok(rig)
    }

    /// Aims an `n_xl x n_yl` spot grid at the scene points imaged by an
    /// evenly spaced grid of pixel centers, so every unoccluded spot lands
    /// exactly on a pixel ray.
    pub fn aimed_at_pixels(
        scene: &Scene,
        camera: Camera,
        laser: Point3,
        n_xl: usize,
        n_yl: usize,
    ) -> Result<LidarRig> {
        camera.validate()?;
        if n_xl == 0 || n_yl == 0 {
            return Err(Error::InvalidRig(
                "spot grid must contain at least one spot".into(),
            ));
        }
        let mut dirs = Vec::with_capacity(n_xl * n_yl);
        for (u, v) in spot_pixels(&camera, n_xl, n_yl) {
            let hit = scene
                .intersect_ray(&camera.pixel_ray(u, v))
                .ok_or_else(|| {
                    Error::RendererIntegrity(format!("pixel ({u}, {v}) escapes the room"))
                })?;
            let dir = Dir3::new(hit.point - laser)
                .ok_or_else(|| Error::InvalidRig("laser origin coincides with a surface".into()))?;
            dirs.push(dir);
        }
        LidarRig::new(camera, laser, (n_xl, n_yl), dirs)
    }

    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        let (a, b) = self.spot_grid;
        if a * b == 0 {
            return Err(Error::InvalidRig(
                "spot grid must contain at least one spot".into(),
            ));
        }
        if self.spot_dirs.len() != a * b {
            return Err(Error::InvalidRig(format!(
                "{} spot directions for a {a}x{b} grid",
                self.spot_dirs.len()
            )));
        }
        if !self.laser.is_finite() {
            return Err(Error::InvalidRig("laser origin must be finite".into()));
        }
        Ok(())
    }

    pub fn spot_count(&self) -> usize {
        self.spot_dirs.len()
    }

    /// Same rig restricted to a single spot.
    pub fn single_spot(&self, i: usize) -> LidarRig {
        LidarRig {
            camera: self.camera,
            laser: self.laser,
            spot_grid: (1, 1),
            spot_dirs: vec![self.spot_dirs[i]],
        }
    }

    /// Same rig with the spots selected by `keep`, in the given order.
    pub fn subset(&self, keep: &[usize]) -> LidarRig {
        LidarRig {
            camera: self.camera,
            laser: self.laser,
            spot_grid: (keep.len(), 1),
            spot_dirs: keep.iter().map(|&i| self.spot_dirs[i]).collect(),
        }
    }
}

/// Pixel centers of an evenly spaced `n_xl x n_yl` grid, row-major.
pub fn spot_pixels(camera: &Camera, n_xl: usize, n_yl: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n_xl * n_yl);
    for b in 0..n_yl {
        let v = ((b as f64 + 0.5) * camera.n_y as f64 / n_yl as f64).floor() as usize;
        for a in 0..n_xl {
            let u = ((a as f64 + 0.5) * camera.n_x as f64 / n_xl as f64).floor() as usize;
            out.push((u.min(camera.n_x - 1), v.min(camera.n_y - 1)));
        }
    }
    out
}

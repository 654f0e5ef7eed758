use super::cube::{CubeConfig, PixelAccumulator, TransientCube};
use super::rig::LidarRig;
use super::spots::{trace_spots, SpotSet, VirtualSource};
use crate::error::{Error, Result};
use crate::geometry::{Dir3, Hit, Material, Point3, Ray, Scene, Shape, SurfaceId};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Cosine below which two surfaces are treated as not facing each other.
pub const FACING_EPSILON: f64 = 1e-6;

const BOUNCE_OFFSET: f64 = 1e-9;

/// Light-path family of a deposit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathFamily {
    /// Laser, spot (or its virtual source), sensor.
    OneBounce,
    /// Laser, spot, imaged diffuse point, sensor.
    TwoBounce,
    /// Laser, spot, mirror pixel, sensor: the spot seen in a mirror.
    MirrorOneBounce,
    /// Laser, spot, diffuse point seen through a mirror pixel, mirror, sensor.
    MirrorTwoBounce,
}

/// Which path families a render deposits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Families {
    pub one_bounce: bool,
    pub two_bounce: bool,
    pub via_mirror: bool,
}

impl Families {
    pub const ALL: Families = Families {
        one_bounce: true,
        two_bounce: true,
        via_mirror: true,
    };
    pub const TWO_BOUNCE_ONLY: Families = Families {
        one_bounce: false,
        two_bounce: true,
        via_mirror: false,
    };

    pub fn includes(&self, f: PathFamily) -> bool {
        match f {
            PathFamily::OneBounce => self.one_bounce,
            PathFamily::TwoBounce => self.two_bounce,
            PathFamily::MirrorOneBounce | PathFamily::MirrorTwoBounce => self.via_mirror,
        }
    }
}

impl Default for Families {
    fn default() -> Self {
        Families::ALL
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub cube: CubeConfig,
    /// Radiant intensity of each laser spot; scales every deposit.
    pub laser_power: f64,
    pub families: Families,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            cube: CubeConfig::default(),
            laser_power: DEFAULT_LASER_POWER,
            families: Families::ALL,
        }
    }
}

/// Keeps noiseless two-bounce deposits well above the default detection
/// floor of the demultiplexer.
pub const DEFAULT_LASER_POWER: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Deposit {
    pub family: PathFamily,
    pub path: f64,
    pub weight: f64,
}

/// Per-pixel ground-truth buffers from the primary rays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GBuffer {
    pub n_x: usize,
    pub n_y: usize,
    /// Range from the sensor along the pixel ray; mirror pixels carry the
    /// distance to the mirror surface.
    pub depth: Vec<f64>,
    pub normals: Vec<Dir3>,
    pub specular: Vec<bool>,
    /// Time-integrated measurement; zero until attached from a cube.
    pub intensity: Vec<f64>,
}

impl GBuffer {
    pub fn attach_intensity(&mut self, cube: &TransientCube) -> Result<()> {
        if cube.n_x != self.n_x || cube.n_y != self.n_y {
            return Err(Error::GeometryMismatch(
                "cube and g-buffer resolutions differ".into(),
            ));
        }
        self.intensity = cube.intensity();
        Ok(())
    }
}

/// Per-spot binary lighting masks, row-major, `true` = lit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowMaskSet {
    pub n_x: usize,
    pub n_y: usize,
    pub masks: Vec<Vec<bool>>,
}

impl ShadowMaskSet {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn all_lit(n_x: usize, n_y: usize, spots: usize) -> ShadowMaskSet {
        ShadowMaskSet {
            n_x,
            n_y,
            masks: vec![vec![true; n_x * n_y]; spots],
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct MirrorView {
    point: Point3,
    normal: Dir3,
    albedo: f64,
    /// Distance from the mirror point to `point`.
    leg: f64,
}

#[derive(Clone, Copy, Debug)]
struct PixelSurface {
    hit: Hit,
    /// Diffuse surface seen through a mirror pixel.
    view: Option<MirrorView>,
}

#[derive(Clone, Copy, Debug)]
struct MirrorImage {
    pixel: usize,
    /// Unfolded sensor-to-spot distance through the mirror.
    distance: f64,
    cos_source: f64,
}

/// Precomputed primary rays and spot geometry for one `(scene, rig)` pair.
pub struct Renderer<'a> {
    scene: &'a Scene,
    rig: &'a LidarRig,
    spots: SpotSet,
    pixels: Vec<PixelSurface>,
    own_pixel: Vec<Option<usize>>,
    mirror_image: Vec<Option<MirrorImage>>,
}

impl<'a> Renderer<'a> {
    pub fn new(scene: &'a Scene, rig: &'a LidarRig) -> Result<Renderer<'a>> {
        rig.validate()?;
        let spots = trace_spots(scene, rig)?;
        Renderer::with_spots(scene, rig, spots)
    }

    pub fn with_spots(scene: &'a Scene, rig: &'a LidarRig, spots: SpotSet) -> Result<Renderer<'a>> {
        let cam = &rig.camera;
        let pixels = (0..cam.pixel_count())
            .into_par_iter()
            .map(|pix| {
                let (u, v) = (pix % cam.n_x, pix / cam.n_x);
                let ray = cam.pixel_ray(u, v);
                let hit = scene.intersect_ray(&ray).ok_or_else(|| {
                    Error::RendererIntegrity(format!("pixel ({u}, {v}) escapes the room"))
                })?;
                let view = if hit.material.is_mirror() {
                    mirror_view(scene, &ray, &hit)
                } else {
                    None
                };
                Ok(PixelSurface { hit, view })
            })
            .collect::<Result<Vec<_>>>()?;

        let own_pixel = spots
            .iter()
            .map(|s| direct_pixel(scene, rig, &s.source))
            .collect();
        let mirror_image = spots
            .iter()
            .map(|s| {
                if s.is_mirror {
                    None
                } else {
                    mirror_pixel(scene, rig, &pixels, &s.source)
                }
            })
            .collect();
        Ok(Renderer {
            scene,
            rig,
            spots,
            pixels,
            own_pixel,
            mirror_image,
        })
    }

    pub fn spots(&self) -> &SpotSet {
        &self.spots
    }

    pub fn rig(&self) -> &LidarRig {
        self.rig
    }

    /// Pixel that directly images the spot's re-radiating point, if any.
    pub fn own_pixel(&self, spot: usize) -> Option<usize> {
        self.own_pixel[spot]
    }

    pub fn is_mirror_pixel(&self, pix: usize) -> bool {
        self.pixels[pix].hit.material.is_mirror()
    }

    pub fn primary_hit(&self, pix: usize) -> &Hit {
        &self.pixels[pix].hit
    }

    pub fn gbuffer(&self) -> GBuffer {
        let cam = &self.rig.camera;
        let n = cam.pixel_count();
        GBuffer {
            n_x: cam.n_x,
            n_y: cam.n_y,
            depth: self.pixels.iter().map(|p| p.hit.distance).collect(),
            normals: self.pixels.iter().map(|p| p.hit.normal).collect(),
            specular: self
                .pixels
                .iter()
                .map(|p| p.hit.material.is_mirror())
                .collect(),
            intensity: vec![0.0; n],
        }
    }

    /// Whether `pix` images spot `s` itself: it is the spot's own pixel and
    /// its primary ray lands on the surface carrying the spot. An own pixel
    /// whose ray slips past an edge onto another surface does not count.
    fn images_spot(&self, s: usize, pix: usize) -> bool {
        if self.own_pixel[s] != Some(pix) {
            return false;
        }
        let src = &self.spots[s].source;
        let hit = &self.pixels[pix].hit;
        hit.normal.dot(src.normal.get()) > 1.0 - 1e-9
            && (hit.point - src.point).dot(src.normal.get()).abs() < 1e-6
    }

    /// Ground-truth lighting: spot `j` lights pixel `(u, v)` when its
    /// re-radiating point and the primary-ray hit see each other unoccluded
    /// with both surfaces facing; a pixel imaging the spot itself is lit.
    pub fn shadow_masks(&self) -> ShadowMaskSet {
        let cam = &self.rig.camera;
        let masks = (0..self.spots.len())
            .map(|s| {
                let src = self.spots[s].source;
                (0..cam.pixel_count())
                    .into_par_iter()
                    .map(|pix| {
                        if self.images_spot(s, pix) {
                            return true;
                        }
                        let hit = &self.pixels[pix].hit;
                        illuminates(self.scene, &src, hit.point, hit.normal)
                    })
                    .collect()
            })
            .collect();
        ShadowMaskSet {
            n_x: cam.n_x,
            n_y: cam.n_y,
            masks,
        }
    }

    /// Every path deposit spot `s` makes at pixel `pix`, before gating.
    pub fn deposits(&self, pix: usize, s: usize, power: f64, out: &mut Vec<Deposit>) {
        let spot = &self.spots[s];
        let src = &spot.source;
        let surface = &self.pixels[pix];
        let x_c = self.rig.camera.position;
        if self.own_pixel[s] == Some(pix) {
            let to_cam = x_c - src.point;
            let r = to_cam.norm();
            let cos = src.normal.dot(to_cam / r);
            out.push(Deposit {
                family: PathFamily::OneBounce,
                path: spot.laser_leg + r,
                weight: power * src.albedo * cos / (PI * r * r),
            });
        }

        let hit = &surface.hit;
        match hit.material {
            Material::Diffuse { albedo } => {
                if !self.images_spot(s, pix) {
                    if let Some(w) =
                        two_bounce_weight(self.scene, src, hit.point, hit.normal, albedo, x_c)
                    {
                        out.push(Deposit {
                            family: PathFamily::TwoBounce,
                            path: spot.laser_leg + (hit.point - src.point).norm() + hit.distance,
                            weight: power * w,
                        });
                    }
                }
            }
            Material::Mirror => {
                // One specular interaction per path: a spot that already
                // reflected off a mirror does not return through another.
                if spot.is_mirror {
                    return;
                }
                match self.mirror_image[s] {
                    Some(img) if img.pixel == pix => out.push(Deposit {
                        family: PathFamily::MirrorOneBounce,
                        path: spot.laser_leg + img.distance,
                        weight: power * src.albedo * img.cos_source
                            / (PI * img.distance * img.distance),
                    }),
                    _ => {
                        if let Some(view) = surface.view {
                            if let Some(w) = two_bounce_weight(
                                self.scene,
                                src,
                                view.point,
                                view.normal,
                                view.albedo,
                                hit.point,
                            ) {
                                out.push(Deposit {
                                    family: PathFamily::MirrorTwoBounce,
                                    path: spot.laser_leg
                                        + (view.point - src.point).norm()
                                        + view.leg
                                        + hit.distance,
                                    weight: power * w,
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    /// Multiplexed render over all spots.
    pub fn render(&self, cfg: &RenderConfig) -> Result<TransientCube> {
        let all: Vec<usize> = (0..self.spots.len()).collect();
        self.render_spots(&all, cfg)
    }

    /// Render restricted to the listed spots, accumulated in list order.
    pub fn render_spots(&self, spots: &[usize], cfg: &RenderConfig) -> Result<TransientCube> {
        cfg.cube.validate()?;
        let cam = &self.rig.camera;
        let mut cube = TransientCube::zeros(cam.n_x, cam.n_y, &cfg.cube);
        let n_t = cfg.cube.n_t;
        cube.data
            .par_chunks_mut(n_t)
            .enumerate()
            .try_for_each_init(
                || (PixelAccumulator::new(n_t), Vec::with_capacity(4)),
                |(acc, buf), (pix, hist)| {
                    for &s in spots {
                        buf.clear();
                        self.deposits(pix, s, cfg.laser_power, buf);
                        for d in buf.iter().filter(|d| cfg.families.includes(d.family)) {
                            acc.deposit(&cfg.cube, d.path, d.weight)?;
                        }
                        acc.flush(hist);
                    }
                    Ok::<(), Error>(())
                },
            )?;
        Ok(cube)
    }

    /// Largest single two-bounce deposit weight over all pixels and spots.
    pub fn max_two_bounce_weight(&self, power: f64) -> f64 {
        (0..self.pixels.len())
            .into_par_iter()
            .map(|pix| {
                let mut buf = Vec::new();
                let mut m: f64 = 0.0;
                for s in 0..self.spots.len() {
                    buf.clear();
                    self.deposits(pix, s, power, &mut buf);
                    for d in &buf {
                        if d.family == PathFamily::TwoBounce {
                            m = m.max(d.weight);
                        }
                    }
                }
                m
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Lambertian two-surface transfer from a virtual source to `x` and on
/// towards `observer`, with inverse-square falloff on the source-to-`x` leg
/// only. `None` when the pair is occluded or not mutually facing.
fn two_bounce_weight(
    scene: &Scene,
    src: &VirtualSource,
    x: Point3,
    n: Dir3,
    albedo: f64,
    observer: Point3,
) -> Option<f64> {
    let d = x - src.point;
    let r2 = d.norm_squared();
    let r = r2.sqrt();
    if !(r > 1e-9) {
        return None;
    }
    let w = d / r;
    let cos_out = src.normal.dot(w);
    let cos_in = -n.dot(w);
    let to_obs = observer - x;
    let cos_obs = n.dot(to_obs / to_obs.norm());
    if cos_out <= FACING_EPSILON || cos_in <= FACING_EPSILON || cos_obs <= 0.0 {
        return None;
    }
    if !scene.visible(src.point, x).unwrap_or(true) {
        return None;
    }
    Some(src.albedo * albedo * cos_out * cos_in * cos_obs / (PI * PI * r2))
}

/// Visibility plus mutual facing between a virtual source and a surface
/// point with normal `n`.
pub fn illuminates(scene: &Scene, src: &VirtualSource, x: Point3, n: Dir3) -> bool {
    let d = x - src.point;
    let r = d.norm();
    if !(r > 1e-9) {
        return true;
    }
    let w = d / r;
    src.normal.dot(w) > FACING_EPSILON
        && -n.dot(w) > FACING_EPSILON
        && scene.visible(src.point, x).unwrap_or(true)
}

fn mirror_view(scene: &Scene, ray: &Ray, hit: &Hit) -> Option<MirrorView> {
    let dir = ray.dir.reflect(hit.normal);
    let next = scene.intersect_ray(&Ray::with_range(
        hit.point,
        dir,
        BOUNCE_OFFSET,
        f64::INFINITY,
    ))?;
    match next.material {
        Material::Diffuse { albedo } => Some(MirrorView {
            point: next.point,
            normal: next.normal,
            albedo,
            leg: next.distance,
        }),
        Material::Mirror => None,
    }
}

/// Pixel whose footprint contains `src.point` when the sensor sees it.
fn direct_pixel(scene: &Scene, rig: &LidarRig, src: &VirtualSource) -> Option<usize> {
    let cam = &rig.camera;
    let to_cam = cam.position - src.point;
    if src.normal.dot(to_cam) <= 0.0 {
        return None;
    }
    let (u, v) = cam.project(src.point)?;
    scene
        .visible(cam.position, src.point)
        .ok()?
        .then(|| cam.pixel_index(u, v))
}

/// Pixel that sees `src.point` reflected in a mirror panel.
fn mirror_pixel(
    scene: &Scene,
    rig: &LidarRig,
    pixels: &[PixelSurface],
    src: &VirtualSource,
) -> Option<MirrorImage> {
    let cam = &rig.camera;
    for (k, obj) in scene.objects.iter().enumerate() {
        let (Material::Mirror, Shape::Panel { center, normal, .. }) = (obj.material, obj.shape)
        else {
            continue;
        };
        let n = normal.get();
        let side_src = (src.point - center).dot(n);
        let side_cam = (cam.position - center).dot(n);
        if side_src * side_cam <= 0.0 {
            continue;
        }
        let image = src.point - n * (2.0 * side_src);
        let Some((u, v)) = cam.project(image) else {
            continue;
        };
        let pix = cam.pixel_index(u, v);
        let hit = &pixels[pix].hit;
        if hit.surface != SurfaceId::Object(k) {
            continue;
        }
        // Where the unfolded sensor-to-image segment crosses the mirror.
        let seg = image - cam.position;
        let s = (center - cam.position).dot(n) / seg.dot(n);
        let x_p = cam.position + seg * s;
        let to_mirror = x_p - src.point;
        let cos_source = src.normal.dot(to_mirror / to_mirror.norm());
        if cos_source <= FACING_EPSILON {
            continue;
        }
        if !scene.visible(cam.position, x_p).unwrap_or(false)
            || !scene.visible(x_p, src.point).unwrap_or(false)
        {
            continue;
        }
        return Some(MirrorImage {
            pixel: pix,
            distance: seg.norm(),
            cos_source,
        });
    }
    None
}

pub fn render_gbuffer(scene: &Scene, rig: &LidarRig) -> Result<GBuffer> {
    Ok(Renderer::new(scene, rig)?.gbuffer())
}

pub fn render_shadow_masks(
    scene: &Scene,
    rig: &LidarRig,
    spots: &SpotSet,
) -> Result<ShadowMaskSet> {
    Ok(Renderer::with_spots(scene, rig, spots.clone())?.shadow_masks())
}

pub fn render_transient(
    scene: &Scene,
    rig: &LidarRig,
    cfg: &RenderConfig,
) -> Result<TransientCube> {
    Renderer::new(scene, rig)?.render(cfg)
}

/// One cube per spot, as captured by sequential illumination.
pub fn render_scanned(
    scene: &Scene,
    rig: &LidarRig,
    cfg: &RenderConfig,
) -> Result<Vec<TransientCube>> {
    let r = Renderer::new(scene, rig)?;
    (0..r.spots().len())
        .map(|s| r.render_spots(&[s], cfg))
        .collect()
}

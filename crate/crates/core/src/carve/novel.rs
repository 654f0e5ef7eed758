use super::grid::{Cell, OccupancyGrid, GRAZE_LENGTH};
use crate::demux::DepthMap;
use crate::error::{Error, Result};
use crate::geometry::{Mat3, Scene, Vec3};
use crate::render::Camera;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How rendering and scoring treat cells the carver could not resolve. The
/// default counts only cells the carver marked occupied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownPolicy {
    Occupied,
    #[default]
    Empty,
}

/// Depth seen from `camera`: distance along each pixel ray to the boundary
/// of the first blocking cell. Rays that leave the grid are invalid.
pub fn render_novel_depth(
    grid: &OccupancyGrid,
    camera: &Camera,
    policy: UnknownPolicy,
) -> Result<DepthMap> {
    camera.validate()?;
    if !grid.contains(camera.position) {
        return Err(Error::PoseOutsideBounds);
    }
    let blocks = |c: Cell| match c {
        Cell::Occupied => true,
        Cell::Unknown => policy == UnknownPolicy::Occupied,
        Cell::Empty => false,
    };
    let est: Vec<Option<f64>> = (0..camera.pixel_count())
        .into_par_iter()
        .map(|pix| {
            let dir = camera.pixel_dir(pix % camera.n_x, pix / camera.n_x).get();
            let mut hit = None;
            grid.traverse(camera.position, dir, 0.0, f64::INFINITY, |idx, t0, t1| {
                if t1 - t0 > GRAZE_LENGTH && blocks(grid.cells[idx]) {
                    hit = Some(t0);
                    return false;
                }
                true
            });
            hit
        })
        .collect();
    Ok(DepthMap {
        n_x: camera.n_x,
        n_y: camera.n_y,
        valid: est.iter().map(Option::is_some).collect(),
        depth: est.into_iter().map(|e| e.unwrap_or(0.0)).collect(),
    })
}

/// Exact range along every pixel ray of `camera` to the first surface of
/// `scene`; mirrors report their own surface.
pub fn scene_depth(scene: &Scene, camera: &Camera) -> Result<DepthMap> {
    camera.validate()?;
    let hits: Vec<Option<f64>> = (0..camera.pixel_count())
        .into_par_iter()
        .map(|pix| {
            scene
                .intersect_ray(&camera.pixel_ray(pix % camera.n_x, pix / camera.n_x))
                .map(|h| h.distance)
        })
        .collect();
    Ok(DepthMap {
        n_x: camera.n_x,
        n_y: camera.n_y,
        valid: hits.iter().map(Option::is_some).collect(),
        depth: hits.into_iter().map(|h| h.unwrap_or(0.0)).collect(),
    })
}

/// `count` poses spread sideways from `camera` (up to a quarter of the room
/// width either way, keeping its height and distance) that all look at the
/// room center. A single view is the capture pose re-aimed at the center.
pub fn novel_views(scene: &Scene, camera: &Camera, count: usize) -> Result<Vec<Camera>> {
    let room = &scene.room;
    let center = (room.min + room.max) * 0.5;
    let half = 0.25 * (room.max.x - room.min.x);
    let up = camera.rotation.column(1);
    (0..count)
        .map(|k| {
            let f = if count > 1 {
                2.0 * k as f64 / (count - 1) as f64 - 1.0
            } else {
                0.0
            };
            let position = camera.position + Vec3::X * (f * half);
            if !room.strictly_contains(position) {
                return Err(Error::PoseOutsideBounds);
            }
            let rotation = Mat3::look_along(center - position, up)
                .ok_or_else(|| Error::InvalidRig("novel view looks along its up axis".into()))?;
            let cam = Camera {
                position,
                rotation,
                ..*camera
            };
            cam.validate()?;
            Ok(cam)
        })
        .collect()
}

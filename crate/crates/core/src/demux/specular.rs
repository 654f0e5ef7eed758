use super::shadows::window_bins;
use super::tof::{two_bounce_path, unproject, DepthMap};
use super::unmix::estimate_normals;
use crate::error::{Error, Result};
use crate::geometry::{Dir3, Vec3};
use crate::render::{LidarRig, SpotSet, TransientCube, FACING_EPSILON};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecularConfig {
    pub tolerance_bins: f64,
    pub min_amplitude: f64,
    /// Spots that must be missing from their predicted diffuse window.
    pub min_spots: usize,
    /// Share of the pixel's mass that must arrive late and unexplained.
    pub min_late_fraction: f64,
}

impl Default for SpecularConfig {
    fn default() -> Self {
        SpecularConfig {
            tolerance_bins: 1.0,
            min_amplitude: 1e-6,
            min_spots: 1,
            min_late_fraction: 0.2,
        }
    }
}

/// Predicted diffuse return of spot `s` at `pix`: one-bounce at the pixel
/// imaging the spot, two-bounce elsewhere.
fn predicted_path(rig: &LidarRig, spots: &SpotSet, s: usize, pix: usize, depth: f64) -> f64 {
    let cam = &rig.camera;
    let spot = &spots[s];
    if cam.project(spot.source.point) == Some((pix % cam.n_x, pix / cam.n_x)) {
        let x = unproject(rig, pix, depth);
        return spot.laser_leg + (x - cam.position).norm();
    }
    two_bounce_path(rig, spots, s, pix, depth)
}

/// Whether a diffuse surface at `x` with normal `n` and spot `s` face each
/// other, ignoring occlusion.
fn predicted_lit(spots: &SpotSet, s: usize, x: Vec3, n: Dir3) -> bool {
    let src = &spots[s].source;
    let Some(w) = Dir3::new(x - src.point) else {
        return false;
    };
    src.normal.dot(w.get()) > FACING_EPSILON && -n.dot(w.get()) > FACING_EPSILON
}

/// Flags pixels whose returns contradict a diffuse surface at the given
/// depth. At least `min_spots` of the spots a diffuse surface there would
/// see (facing test with normals estimated from `depth`; the imaged spot
/// always counts) must be missing from their predicted windows, and at
/// least `min_late_fraction` of the measured mass must arrive after the
/// earliest predicted return while lying outside every predicted window.
pub fn detect_specular(
    measured: &TransientCube,
    depth: &DepthMap,
    rig: &LidarRig,
    spots: &SpotSet,
    cfg: &SpecularConfig,
) -> Result<Vec<bool>> {
    let cam = &rig.camera;
    if measured.n_x != cam.n_x
        || measured.n_y != cam.n_y
        || depth.n_x != cam.n_x
        || depth.n_y != cam.n_y
    {
        return Err(Error::GeometryMismatch(
            "cube, depth and sensor resolutions differ".into(),
        ));
    }
    let cube_cfg = measured.config();
    let normals = estimate_normals(depth, rig);
    Ok((0..cam.pixel_count())
        .into_par_iter()
        .map(|pix| {
            let (Some(d), Some(n)) = (depth.get(pix), normals[pix]) else {
                return false;
            };
            let (u, v) = (pix % cam.n_x, pix / cam.n_x);
            let hist = measured.histogram(u, v);
            let x = unproject(rig, pix, d);
            let mut explained = vec![false; hist.len()];
            let mut earliest = f64::INFINITY;
            let mut missing = 0;
            for s in 0..spots.len() {
                let path = predicted_path(rig, spots, s, pix, d);
                let pos = cube_cfg.position(path);
                earliest = earliest.min(pos);
                let w = window_bins(&cube_cfg, pos, cfg.tolerance_bins);
                explained[w.clone()].fill(true);
                let own = cam.project(spots[s].source.point) == Some((u, v));
                if (own || predicted_lit(spots, s, x, n))
                    && !w.is_empty()
                    && hist[w].iter().map(|&m| m as f64).sum::<f64>() < cfg.min_amplitude
                {
                    missing += 1;
                }
            }
            if missing < cfg.min_spots.max(1) {
                return false;
            }
            let total: f64 = hist.iter().map(|&m| m as f64).sum();
            let late: f64 = hist
                .iter()
                .enumerate()
                .filter(|&(k, _)| !explained[k] && k as f64 + 0.5 > earliest)
                .map(|(_, &m)| m as f64)
                .sum();
            late >= cfg.min_amplitude && late >= cfg.min_late_fraction * total
        })
        .collect())
}

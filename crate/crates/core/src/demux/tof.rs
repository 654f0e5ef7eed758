use crate::error::{Error, Result};
use crate::geometry::{Point3, SPEED_OF_LIGHT};
use crate::render::{GBuffer, LidarRig, SpotSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Range map (meters along each pixel ray) with a validity mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthMap {
    pub n_x: usize,
    pub n_y: usize,
    pub depth: Vec<f64>,
    pub valid: Vec<bool>,
}

impl DepthMap {
    pub fn new(n_x: usize, n_y: usize, depth: Vec<f64>, valid: Vec<bool>) -> Result<DepthMap> {
        if depth.len() != n_x * n_y || valid.len() != n_x * n_y {
            return Err(Error::InvalidInput(
                "depth map size does not match its dimensions".into(),
            ));
        }
        Ok(DepthMap {
            n_x,
            n_y,
            depth,
            valid,
        })
    }

    pub fn invalid(n_x: usize, n_y: usize) -> DepthMap {
        DepthMap {
            n_x,
            n_y,
            depth: vec![0.0; n_x * n_y],
            valid: vec![false; n_x * n_y],
        }
    }

    /// Every pixel valid.
    pub fn from_values(n_x: usize, n_y: usize, depth: Vec<f64>) -> Result<DepthMap> {
        let valid = depth.iter().map(|d| d.is_finite() && *d > 0.0).collect();
        DepthMap::new(n_x, n_y, depth, valid)
    }

    pub fn from_gbuffer(g: &GBuffer) -> DepthMap {
        DepthMap {
            n_x: g.n_x,
            n_y: g.n_y,
            depth: g.depth.clone(),
            valid: vec![true; g.depth.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    pub fn get(&self, pix: usize) -> Option<f64> {
        self.valid[pix].then(|| self.depth[pix])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn same_shape(&self, other: &DepthMap) -> bool {
        self.n_x == other.n_x && self.n_y == other.n_y
    }
}

/// Per-spot two-bounce time of flight, seconds, row-major per map.
/// Entries at invalid pixels are zero and must be ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TofMapSet {
    pub n_x: usize,
    pub n_y: usize,
    pub maps: Vec<Vec<f64>>,
    pub valid: Vec<bool>,
}

impl TofMapSet {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Pathlength `c t` for spot `s` at pixel `pix`.
    pub fn path(&self, s: usize, pix: usize) -> Option<f64> {
        self.valid[pix].then(|| self.maps[s][pix] * SPEED_OF_LIGHT)
    }
}

/// Scene point imaged at `pix` for range `depth`.
pub fn unproject(rig: &LidarRig, pix: usize, depth: f64) -> Point3 {
    let cam = &rig.camera;
    cam.position + cam.pixel_dir(pix % cam.n_x, pix / cam.n_x).get() * depth
}

/// Occlusion-free two-bounce pathlength of spot `s` through the point
/// imaged at `pix` with range `depth`.
pub fn two_bounce_path(rig: &LidarRig, spots: &SpotSet, s: usize, pix: usize, depth: f64) -> f64 {
    let x = unproject(rig, pix, depth);
    let spot = &spots[s];
    spot.laser_leg + (x - spot.source.point).norm() + (x - rig.camera.position).norm()
}

/// `t_2B = (|x_i - x_l| + |x_uv - x_i| + |x_uv - x_c|) / c` for every spot
/// and pixel, with `x_uv` unprojected from `depth`. Mirror spots use their
/// virtual source and the accumulated laser leg.
pub fn two_bounce_tof(depth: &DepthMap, rig: &LidarRig, spots: &SpotSet) -> Result<TofMapSet> {
    let cam = &rig.camera;
    if depth.n_x != cam.n_x || depth.n_y != cam.n_y {
        return Err(Error::GeometryMismatch(
            "depth map and sensor resolutions differ".into(),
        ));
    }
    let maps = (0..spots.len())
        .map(|s| {
            (0..depth.len())
                .into_par_iter()
                .map(|pix| match depth.get(pix) {
                    Some(d) => two_bounce_path(rig, spots, s, pix, d) / SPEED_OF_LIGHT,
                    None => 0.0,
                })
                .collect()
        })
        .collect();
    Ok(TofMapSet {
        n_x: depth.n_x,
        n_y: depth.n_y,
        maps,
        valid: depth.valid.clone(),
    })
}

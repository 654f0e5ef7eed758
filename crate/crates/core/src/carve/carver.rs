use super::grid::{Cell, OccupancyGrid};
use crate::demux::{estimate_normals, unproject, DepthMap};
use crate::error::{Error, Result};
use crate::geometry::{Dir3, Point3, Room};
use crate::render::{LidarRig, ShadowMaskSet, SpotSet, FACING_EPSILON};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarveConfig {
    pub dims: [usize; 3],
    /// Voxels around the visible surface that lit segments may not carve.
    pub shell_dilation: usize,
}

impl Default for CarveConfig {
    fn default() -> Self {
        CarveConfig {
            dims: [64, 64, 64],
            shell_dilation: 1,
        }
    }
}

fn union(a: Vec<bool>, b: Vec<bool>) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| x | y).collect()
}

/// Flags every cell crossed by the segments produced per item; the result is
/// a set union and so independent of iteration order.
fn mark_segments<F>(grid: &OccupancyGrid, items: usize, segment: F) -> Vec<bool>
where
    F: Fn(usize, &mut Vec<usize>) + Sync,
{
    let n = grid.len();
    (0..items)
        .into_par_iter()
        .fold(
            || (vec![false; n], Vec::new()),
            |(mut flags, mut buf), i| {
                buf.clear();
                segment(i, &mut buf);
                for &c in &buf {
                    flags[c] = true;
                }
                (flags, buf)
            },
        )
        .map(|(f, _)| f)
        .reduce(|| vec![false; n], union)
}

/// Occlusion-aware space carving from a depth map and per-spot shadow masks.
///
/// Cells holding visible-surface points become Occupied. Primary rays carve
/// free space up to one voxel short of the surface, and every lit
/// (spot, pixel) segment carves the cells it crosses outside the dilated
/// surface shell. Cells still Unknown on a shadowed segment become Occupied;
/// a dark pair counts as shadowed only when the spot and the surface,
/// with its normal estimated from the depth map, face each other.
pub fn carve_occupancy(
    depth: &DepthMap,
    shadows: &ShadowMaskSet,
    rig: &LidarRig,
    spots: &SpotSet,
    room: &Room,
    cfg: &CarveConfig,
) -> Result<OccupancyGrid> {
    let cam = &rig.camera;
    if spots.is_empty() || shadows.is_empty() {
        return Err(Error::InvalidInput(
            "carving needs at least one spot and mask".into(),
        ));
    }
    if shadows.len() != spots.len() {
        return Err(Error::InvalidInput(format!(
            "{} masks for {} spots",
            shadows.len(),
            spots.len()
        )));
    }
    if depth.n_x != cam.n_x
        || depth.n_y != cam.n_y
        || shadows.n_x != cam.n_x
        || shadows.n_y != cam.n_y
    {
        return Err(Error::GeometryMismatch(
            "depth, masks and sensor resolutions differ".into(),
        ));
    }
    if shadows.masks.iter().any(|m| m.len() != depth.len()) {
        return Err(Error::GeometryMismatch(
            "mask length differs from the pixel count".into(),
        ));
    }
    let mut grid = OccupancyGrid::over_room(room, cfg.dims)?;
    let n_pix = depth.len();
    let points: Vec<Option<Point3>> = (0..n_pix)
        .map(|p| depth.get(p).map(|d| unproject(rig, p, d)))
        .collect();

    // Surface cells are taken just behind the surface so that walls land in
    // the layer outside the room.
    let nudge = {
        let s = grid.voxel_size();
        1e-3 * s.x.min(s.y).min(s.z)
    };
    let mut surface = vec![false; grid.len()];
    for p in 0..n_pix {
        if let Some(c) = depth
            .get(p)
            .and_then(|d| grid.cell_of(unproject(rig, p, d + nudge)))
        {
            surface[grid.index(c)] = true;
        }
    }
    let shell = grid.dilate(&surface, cfg.shell_dilation);

    let step = {
        let s = grid.voxel_size();
        s.x.max(s.y).max(s.z)
    };
    let frustum = mark_segments(&grid, n_pix, |p, out| {
        if let Some(d) = depth.get(p) {
            let reach = d - step;
            if reach > 0.0 {
                grid.segment_cells(cam.position, unproject(rig, p, reach), out);
            }
        }
    });
    let n_pairs = spots.len() * n_pix;
    let pair = |i: usize| (i / n_pix, i % n_pix);
    let lit = mark_segments(&grid, n_pairs, |i, out| {
        let (s, p) = pair(i);
        if let (true, Some(x)) = (shadows.masks[s][p], points[p]) {
            grid.segment_cells(spots[s].source.point, x, out);
        }
    });

    for i in 0..grid.len() {
        grid.cells[i] = if surface[i] {
            Cell::Occupied
        } else if frustum[i] || (lit[i] && !shell[i]) {
            Cell::Empty
        } else {
            Cell::Unknown
        };
    }

    // A dark pixel whose surface turns away from the spot carries no
    // occlusion evidence.
    let normals = estimate_normals(depth, rig);
    let shadowed = mark_segments(&grid, n_pairs, |i, out| {
        let (s, p) = pair(i);
        let (Some(x), Some(n)) = (points[p], normals[p]) else {
            return;
        };
        let src = &spots[s].source;
        let Some(to_src) = Dir3::new(src.point - x).map(Dir3::get) else {
            return;
        };
        if !shadows.masks[s][p] && n.dot(to_src) > FACING_EPSILON {
            grid.segment_cells(src.point, x, out);
        }
    });
    for (cell, cand) in grid.cells.iter_mut().zip(shadowed) {
        if cand && *cell == Cell::Unknown {
            *cell = Cell::Occupied;
        }
    }
    Ok(grid)
}

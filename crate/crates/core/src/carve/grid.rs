use crate::error::{Error, Result};
use crate::geometry::{Material, Point3, Room, Scene, Shape, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// State of one voxel. The discriminants are the on-disk byte values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum Cell {
    #[default]
    Unknown = 0,
    Empty = 1,
    Occupied = 2,
}

impl Cell {
    pub fn from_byte(b: u8) -> Option<Cell> {
        match b {
            0 => Some(Cell::Unknown),
            1 => Some(Cell::Empty),
            2 => Some(Cell::Occupied),
            _ => None,
        }
    }
}

/// Crossings shorter than this, in meters, count as touching a cell edge or
/// corner rather than passing through the cell.
pub const GRAZE_LENGTH: f64 = 1e-9;

/// Axis-aligned voxel grid, cell `(x, y, z)` at index `(z * gy + y) * gx + x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    pub dims: [usize; 3],
    pub min: Point3,
    pub max: Point3,
    pub cells: Vec<Cell>,
}

impl OccupancyGrid {
    pub fn new(min: Point3, max: Point3, dims: [usize; 3]) -> Result<OccupancyGrid> {
        if dims.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "grid dimensions {dims:?} must be positive"
            )));
        }
        if !(min.is_finite() && max.is_finite() && (0..3).all(|k| max[k] > min[k])) {
            return Err(Error::InvalidInput(
                "grid bounds must be finite with positive extent".into(),
            ));
        }
        Ok(OccupancyGrid {
            dims,
            min,
            max,
            cells: vec![Cell::Unknown; dims[0] * dims[1] * dims[2]],
        })
    }

    /// Grid enclosing the room with one layer of cells outside every wall, so
    /// the walls lie on cell faces and the inner `dims - 2` cells per axis
    /// tile the room exactly.
    pub fn over_room(room: &Room, dims: [usize; 3]) -> Result<OccupancyGrid> {
        if dims.iter().any(|&d| d < 3) {
            return Err(Error::InvalidInput(format!(
                "room grid dimensions {dims:?} must be at least 3"
            )));
        }
        let e = room.max - room.min;
        let pad = Vec3::new(
            e.x / (dims[0] - 2) as f64,
            e.y / (dims[1] - 2) as f64,
            e.z / (dims[2] - 2) as f64,
        );
        OccupancyGrid::new(room.min - pad, room.max + pad, dims)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn voxel_size(&self) -> Vec3 {
        let e = self.max - self.min;
        Vec3::new(
            e.x / self.dims[0] as f64,
            e.y / self.dims[1] as f64,
            e.z / self.dims[2] as f64,
        )
    }

    pub fn voxel_diagonal(&self) -> f64 {
        self.voxel_size().norm()
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        (c[2] * self.dims[1] + c[1]) * self.dims[0] + c[0]
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let [gx, gy, _] = self.dims;
        [idx % gx, (idx / gx) % gy, idx / (gx * gy)]
    }

    /// Cell containing `p`; points on the outer faces belong to the boundary
    /// cells.
    pub fn cell_of(&self, p: Point3) -> Option<[usize; 3]> {
        let s = self.voxel_size();
        let mut c = [0; 3];
        for k in 0..3 {
            let f = (p[k] - self.min[k]) / s[k];
            if !(f >= -1e-9 && f <= self.dims[k] as f64 + 1e-9) {
                return None;
            }
            c[k] = (f.floor().max(0.0) as usize).min(self.dims[k] - 1);
        }
        Some(c)
    }

    pub fn center(&self, c: [usize; 3]) -> Point3 {
        let s = self.voxel_size();
        Vec3::new(
            self.min.x + (c[0] as f64 + 0.5) * s.x,
            self.min.y + (c[1] as f64 + 0.5) * s.y,
            self.min.z + (c[2] as f64 + 0.5) * s.z,
        )
    }

    pub fn cell_bounds(&self, c: [usize; 3]) -> (Point3, Point3) {
        let s = self.voxel_size();
        let lo = Vec3::new(
            self.min.x + c[0] as f64 * s.x,
            self.min.y + c[1] as f64 * s.y,
            self.min.z + c[2] as f64 * s.z,
        );
        (lo, lo + s)
    }

    pub fn contains(&self, p: Point3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn count(&self, state: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    pub fn same_layout(&self, other: &OccupancyGrid) -> bool {
        self.dims == other.dims && self.min == other.min && self.max == other.max
    }

    /// Cells within Chebyshev distance `radius` of a flagged cell.
    pub fn dilate(&self, flags: &[bool], radius: usize) -> Vec<bool> {
        if radius == 0 {
            return flags.to_vec();
        }
        let [gx, gy, gz] = self.dims;
        let r = radius as isize;
        (0..flags.len())
            .into_par_iter()
            .map(|i| {
                let [x, y, z] = self.coords(i).map(|v| v as isize);
                for dz in -r..=r {
                    let zz = z + dz;
                    if zz < 0 || zz >= gz as isize {
                        continue;
                    }
                    for dy in -r..=r {
                        let yy = y + dy;
                        if yy < 0 || yy >= gy as isize {
                            continue;
                        }
                        for dx in -r..=r {
                            let xx = x + dx;
                            if xx >= 0
                                && xx < gx as isize
                                && flags[self.index([xx as usize, yy as usize, zz as usize])]
                            {
                                return true;
                            }
                        }
                    }
                }
                false
            })
            .collect()
    }

    /// Walks the cells crossed by `origin + t dir` for `t` in
    /// `[t_min, t_max]`, calling `visit(index, t_enter, t_exit)` in order
    /// until it returns `false`. Cells touched only at an edge or corner are
    /// reported with `t_enter == t_exit`.
    pub fn traverse(
        &self,
        origin: Point3,
        dir: Vec3,
        t_min: f64,
        t_max: f64,
        mut visit: impl FnMut(usize, f64, f64) -> bool,
    ) {
        let (mut t0, mut t1) = (t_min, t_max);
        for k in 0..3 {
            if dir[k] == 0.0 {
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return;
                }
                continue;
            }
            let a = (self.min[k] - origin[k]) / dir[k];
            let b = (self.max[k] - origin[k]) / dir[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        if !(t0 <= t1) {
            return;
        }
        let s = self.voxel_size();
        let start = origin + dir * t0;
        let mut cell = [0isize; 3];
        let mut step = [0isize; 3];
        let mut t_next = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for k in 0..3 {
            let f = ((start[k] - self.min[k]) / s[k]).floor() as isize;
            let mut c = f.clamp(0, self.dims[k] as isize - 1);
            // A start exactly on a cell face belongs to the cell ahead.
            if dir[k] < 0.0 && c > 0 && start[k] - (self.min[k] + c as f64 * s[k]) <= 0.0 {
                c -= 1;
            }
            cell[k] = c;
            if dir[k] > 0.0 {
                step[k] = 1;
                t_next[k] = (self.min[k] + (c + 1) as f64 * s[k] - origin[k]) / dir[k];
                t_delta[k] = s[k] / dir[k];
            } else if dir[k] < 0.0 {
                step[k] = -1;
                t_next[k] = (self.min[k] + c as f64 * s[k] - origin[k]) / dir[k];
                t_delta[k] = -s[k] / dir[k];
            }
        }
        let mut t = t0;
        loop {
            let k = if t_next[0] <= t_next[1] && t_next[0] <= t_next[2] {
                0
            } else if t_next[1] <= t_next[2] {
                1
            } else {
                2
            };
            let exit = t_next[k].min(t1).max(t);
            let idx = self.index([cell[0] as usize, cell[1] as usize, cell[2] as usize]);
            if !visit(idx, t, exit) || t_next[k] >= t1 {
                return;
            }
            t = exit;
            cell[k] += step[k];
            if cell[k] < 0 || cell[k] >= self.dims[k] as isize {
                return;
            }
            t_next[k] += t_delta[k];
        }
    }

    /// Indices of cells the open segment `a -> b` passes through with
    /// positive length.
    pub fn segment_cells(&self, a: Point3, b: Point3, out: &mut Vec<usize>) {
        let d = b - a;
        let min_len = GRAZE_LENGTH / d.norm().max(GRAZE_LENGTH);
        self.traverse(a, d, 0.0, 1.0, |idx, t0, t1| {
            if t1 - t0 > min_len {
                out.push(idx);
            }
            true
        });
    }
}

/// Whether a solid shares positive volume with the box `[lo, hi]`. Boxes
/// and spheres are tested exactly; other solids on an inset sample lattice.
pub fn overlaps_cell(shape: &Shape, lo: Point3, hi: Point3) -> bool {
    match *shape {
        Shape::Box { min, max } => (0..3).all(|k| lo[k] < max[k] && hi[k] > min[k]),
        Shape::Sphere { center, radius } => {
            let q = center.max(lo).min(hi);
            (q - center).norm_squared() < radius * radius
        }
        Shape::Panel { .. } => false,
        Shape::Cylinder { .. } => {
            let (bmin, bmax) = shape.bounds();
            if !(0..3).all(|k| lo[k] < bmax[k] && hi[k] > bmin[k]) {
                return false;
            }
            const N: usize = 6;
            let c = (lo + hi) * 0.5;
            let at = |i: usize, k: usize| lo[k] + (hi[k] - lo[k]) * i as f64 / (N - 1) as f64;
            (0..N * N * N).any(|i| {
                let p = Vec3::new(at(i % N, 0), at(i / N % N, 1), at(i / (N * N), 2));
                shape.contains(p + (c - p) * 0.02)
            })
        }
    }
}

/// Ground-truth occupancy: a cell is Occupied when it shares volume with a
/// solid object, Empty otherwise. Mirror panels and walls have no volume.
pub fn voxelize_scene(scene: &Scene, dims: [usize; 3]) -> Result<OccupancyGrid> {
    let mut grid = OccupancyGrid::over_room(&scene.room, dims)?;
    let solids: Vec<_> = scene
        .objects
        .iter()
        .filter(|o| !matches!(o.material, Material::Mirror))
        .collect();
    let cells: Vec<Cell> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = grid.cell_bounds(grid.coords(i));
            if solids.iter().any(|o| overlaps_cell(&o.shape, lo, hi)) {
                Cell::Occupied
            } else {
                Cell::Empty
            }
        })
        .collect();
    grid.cells = cells;
    Ok(grid)
}

/// Cells lying wholly inside some solid object, where carving must never
/// reach.
pub fn interior_of_solids(scene: &Scene, grid: &OccupancyGrid) -> Vec<bool> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = grid.cell_bounds(grid.coords(i));
            scene.objects.iter().any(|o| {
                (0..8).all(|m| {
                    let p = Vec3::new(
                        if m & 1 == 0 { lo.x } else { hi.x },
                        if m & 2 == 0 { lo.y } else { hi.y },
                        if m & 4 == 0 { lo.z } else { hi.z },
                    );
                    o.shape.contains(p)
                })
            })
        })
        .collect()
}

/// Cells at least `margin` layers in from the grid faces. A margin of two
/// skips the layer outside the walls and the layer against them.
pub fn interior_cells(grid: &OccupancyGrid, margin: usize) -> Vec<bool> {
    (0..grid.len())
        .map(|i| {
            let c = grid.coords(i);
            (0..3).all(|k| c[k] >= margin && c[k] + margin < grid.dims[k])
        })
        .collect()
}

use super::formats::FORMAT_VERSION;
use crate::carve::{Cell, OccupancyGrid};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const GRID_MAGIC: &[u8; 8] = b"SB3DGRID";
/// Magic, version and three u32 dimensions.
pub const GRID_HEADER_LEN: usize = 8 + 4 + 3 * 4;

/// Bounds sidecar written next to a grid file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridBounds {
    pub dims: [usize; 3],
    pub min: Point3,
    pub max: Point3,
    pub voxel_size: Point3,
}

/// Header followed by one byte per cell in index order (0 unknown, 1 empty,
/// 2 occupied).
pub fn grid_to_bytes(grid: &OccupancyGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(GRID_HEADER_LEN + grid.len());
    out.extend_from_slice(GRID_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for d in grid.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend(grid.cells.iter().map(|&c| c as u8));
    out
}

/// Decodes the cell payload; bounds come from the sidecar.
pub fn grid_from_bytes(bytes: &[u8], bounds: &GridBounds) -> Result<OccupancyGrid> {
    if bytes.len() < 8 || &bytes[..8] != GRID_MAGIC {
        let found = String::from_utf8_lossy(&bytes[..bytes.len().min(8)]).into_owned();
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(GRID_MAGIC).into_owned(),
            found,
        });
    }
    if bytes.len() < GRID_HEADER_LEN {
        return Err(Error::Truncated {
            expected: GRID_HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(8);
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            expected: FORMAT_VERSION,
            found: version,
        });
    }
    let dims = [
        u32_at(12) as usize,
        u32_at(16) as usize,
        u32_at(20) as usize,
    ];
    if dims != bounds.dims {
        return Err(Error::GeometryMismatch(format!(
            "grid {dims:?} but sidecar {:?}",
            bounds.dims
        )));
    }
    let mut grid = OccupancyGrid::new(bounds.min, bounds.max, dims)?;
    let expected = GRID_HEADER_LEN + grid.len();
    if bytes.len() != expected {
        return Err(Error::Truncated {
            expected: expected as u64,
            found: bytes.len() as u64,
        });
    }
    for (c, &b) in grid.cells.iter_mut().zip(&bytes[GRID_HEADER_LEN..]) {
        *c = Cell::from_byte(b).ok_or_else(|| Error::InvalidInput(format!("cell byte {b}")))?;
    }
    Ok(grid)
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes `path` and its bounds sidecar (same stem, `.json`).
pub fn write_grid(path: &Path, grid: &OccupancyGrid) -> Result<()> {
    let bounds = GridBounds {
        dims: grid.dims,
        min: grid.min,
        max: grid.max,
        voxel_size: grid.voxel_size(),
    };
    fs::write(path, grid_to_bytes(grid))?;
    fs::write(sidecar(path), serde_json::to_string_pretty(&bounds)?)?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<OccupancyGrid> {
    let bounds: GridBounds = serde_json::from_slice(&fs::read(sidecar(path))?)?;
    grid_from_bytes(&fs::read(path)?, &bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    #[test]
    fn grid_round_trip() {
        let mut g = OccupancyGrid::new(
            Vec3::new(-1.0, 0.0, 0.5),
            Vec3::new(1.0, 2.0, 3.0),
            [3, 4, 5],
        )
        .unwrap();
        for (i, c) in g.cells.iter_mut().enumerate() {
            *c = [Cell::Unknown, Cell::Empty, Cell::Occupied][i % 3];
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("grid.sb3d");
        write_grid(&p, &g).unwrap();
        assert_eq!(read_grid(&p).unwrap(), g);
        let bytes = fs::read(&p).unwrap();
        assert_eq!(&bytes[..8], GRID_MAGIC);
        assert_eq!(bytes.len(), GRID_HEADER_LEN + 60);
    }
}

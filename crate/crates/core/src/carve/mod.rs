//! Deterministic space carving: a tri-state occupancy grid built from depth
//! and per-spot shadow masks, and depth rendering from novel viewpoints.

mod carver;
mod grid;
mod novel;

pub use carver::{carve_occupancy, CarveConfig};
pub use grid::{
    interior_cells, interior_of_solids, overlaps_cell, voxelize_scene, Cell, OccupancyGrid,
    GRAZE_LENGTH,
};
pub use novel::{novel_views, render_novel_depth, scene_depth, UnknownPolicy};

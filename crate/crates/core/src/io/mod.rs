//! Scene descriptions, procedural generation, binary file formats and
//! dataset manifests.

mod formats;
mod generate;
mod grid;
mod manifest;
mod spec;

pub use formats::{
    gray_to_pgm, mask_file_name, mask_to_pgm, parse_pgm, read_depth, read_mask, read_shadow_masks,
    read_tof, read_transient, transient_from_bytes, transient_to_bytes, write_depth, write_mask,
    write_shadow_masks, write_tof, write_transient, Header, DEPTH_MAGIC, FORMAT_VERSION,
    HEADER_LEN, TOF_MAGIC, TRANSIENT_MAGIC,
};
pub use generate::{
    default_rig, generate_scene, hidden_cube_scene, GeneratorConfig, Range, HIDDEN_CUBE_INDEX,
};
pub use grid::{
    grid_from_bytes, grid_to_bytes, read_grid, write_grid, GridBounds, GRID_HEADER_LEN, GRID_MAGIC,
};
pub use manifest::{sha256_hex, Manifest, ManifestEntry};
pub use spec::{MirrorSpec, RigSpec, SceneSpec};

use crate::common::{ensure_dir, Globals};
use bounce_core::carve::{
    carve_occupancy, novel_views, render_novel_depth, CarveConfig, UnknownPolicy,
};
use bounce_core::io::{read_depth, read_shadow_masks, write_depth, write_grid};
use bounce_core::render::{trace_spots, Camera};
use clap::ValueEnum;
use std::path::{Path, PathBuf};

pub const GRID_FILE: &str = "grid.bin";
pub const VIEWS_FILE: &str = "views.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Unknown {
    Occupied,
    Empty,
}

impl From<Unknown> for UnknownPolicy {
    fn from(u: Unknown) -> Self {
        match u {
            Unknown::Occupied => UnknownPolicy::Occupied,
            Unknown::Empty => UnknownPolicy::Empty,
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long)]
    pub depth: PathBuf,

    /// Directory of per-spot shadow masks.
    #[arg(long)]
    pub shadows: PathBuf,

    #[arg(long)]
    pub scene: PathBuf,

    /// Output directory: grid.bin (+ grid.json bounds), views.json and
    /// viewNN.depth.sb3d.
    #[arg(long)]
    pub out: PathBuf,

    /// Cells per axis.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,

    /// Novel views to render.
    #[arg(long, default_value_t = 3)]
    pub views: usize,

    /// How unresolved cells are treated when rendering views.
    #[arg(long, value_enum, default_value_t = Unknown::Empty)]
    pub unknown: Unknown,
}

pub fn view_file(k: usize) -> String {
    format!("view{k:02}.depth.sb3d")
}

pub fn read_views(dir: &Path) -> anyhow::Result<Vec<Camera>> {
    Ok(serde_json::from_slice(&std::fs::read(
        dir.join(VIEWS_FILE),
    )?)?)
}

pub fn run(g: &Globals, a: Args) -> anyhow::Result<()> {
    let spec = g.load_scene(&a.scene)?;
    let (scene, rig) = spec.build()?;
    let spots = trace_spots(&scene, &rig)?;
    let depth = read_depth(&a.depth)?;
    let masks = read_shadow_masks(&a.shadows)?;
    let cfg = CarveConfig {
        dims: [a.grid; 3],
        ..CarveConfig::default()
    };
    let grid = carve_occupancy(&depth, &masks, &rig, &spots, &scene.room, &cfg)?;

    ensure_dir(&a.out)?;
    write_grid(&a.out.join(GRID_FILE), &grid)?;
    let cams = novel_views(&scene, &rig.camera, a.views)?;
    for (k, cam) in cams.iter().enumerate() {
        write_depth(
            &a.out.join(view_file(k)),
            &render_novel_depth(&grid, cam, a.unknown.into())?,
        )?;
    }
    std::fs::write(
        a.out.join(VIEWS_FILE),
        serde_json::to_string_pretty(&cams)? + "\n",
    )?;
    println!(
        "{} occupied, {} empty of {} cells",
        grid.count(bounce_core::carve::Cell::Occupied),
        grid.count(bounce_core::carve::Cell::Empty),
        grid.len()
    );
    Ok(())
}

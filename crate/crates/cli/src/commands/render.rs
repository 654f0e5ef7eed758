use crate::common::{sibling, spot_cube_suffix, Globals};
use anyhow::Context;
use bounce_core::demux::DepthMap;
use bounce_core::io::{
    gray_to_pgm, write_depth, write_mask, write_shadow_masks, write_transient, SceneSpec,
};
use bounce_core::render::Renderer;
use std::path::{Path, PathBuf};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Scene description (JSON).
    #[arg(long)]
    pub scene: PathBuf,

    /// Output cube. Ground truth lands next to it: `<stem>.depth.sb3d`,
    /// `<stem>.specular.pgm`, `<stem>.intensity.pgm` and `<stem>.shadows/`.
    #[arg(long)]
    pub out: PathBuf,

    /// Also write one single-spot cube per spot (`<stem>.spotNNN.sb3d`).
    #[arg(long)]
    pub scanned: bool,
}

pub fn run(g: &Globals, a: Args) -> anyhow::Result<()> {
    let spec = g.load_scene(&a.scene)?;
    render_scene(g, &spec, &a.out, a.scanned, g.seed)
}

/// Renders `spec` to `out` and its ground-truth siblings.
pub fn render_scene(
    g: &Globals,
    spec: &SceneSpec,
    out: &Path,
    scanned: bool,
    seed: u64,
) -> anyhow::Result<()> {
    let (scene, rig) = spec.build()?;
    let r = Renderer::new(&scene, &rig)?;
    let cfg = g.render_config()?;
    let mut gb = r.gbuffer();
    let cube = g.capture(&r, &cfg, seed)?;
    gb.attach_intensity(&cube)?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        crate::common::ensure_dir(dir)?;
    }
    write_transient(out, &cube).with_context(|| format!("writing {}", out.display()))?;
    write_depth(&sibling(out, "depth.sb3d"), &DepthMap::from_gbuffer(&gb))?;
    write_mask(&sibling(out, "specular.pgm"), gb.n_x, gb.n_y, &gb.specular)?;
    let peak = gb.intensity.iter().copied().fold(0.0, f64::max);
    std::fs::write(
        sibling(out, "intensity.pgm"),
        gray_to_pgm(gb.n_x, gb.n_y, &gb.intensity, peak),
    )?;
    write_shadow_masks(&sibling(out, "shadows"), &r.shadow_masks())?;
    if scanned {
        for s in 0..r.spots().len() {
            let c = g.measure(
                &r,
                &cfg,
                r.render_spots(&[s], &cfg)?,
                seed.wrapping_add(s as u64 + 1),
            )?;
            write_transient(&sibling(out, &spot_cube_suffix(s)), &c)?;
        }
    }
    Ok(())
}

use super::render::render_scene;
use crate::common::{ensure_dir, invalid, Globals};
use anyhow::Context;
use bounce_core::io::{generate_scene, GeneratorConfig, Manifest};
use rayon::prelude::*;
use std::path::PathBuf;

pub const MANIFEST: &str = "manifest.json";

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Output directory; with --verify, the dataset to check.
    #[arg(long)]
    pub out: PathBuf,

    /// Number of scenes; scene k uses seed `--seed + k`.
    #[arg(long, default_value_t = 10)]
    pub n: u64,

    /// Procedural scenes without the mirror panel.
    #[arg(long)]
    pub no_mirror: bool,

    /// Check an existing dataset against its manifest instead of writing.
    #[arg(long)]
    pub verify: bool,
}

pub fn scene_dir_name(k: u64) -> String {
    format!("scene_{k:04}")
}

pub fn run(g: &Globals, a: Args) -> anyhow::Result<()> {
    if a.verify {
        let m = Manifest::load(&a.out.join(MANIFEST))?;
        let bad = m.verify(&a.out)?;
        if !bad.is_empty() {
            anyhow::bail!(
                "{} artifacts differ from the manifest: {}",
                bad.len(),
                bad.join(", ")
            );
        }
        println!("{} artifacts verified", m.entries.len());
        return Ok(());
    }
    if a.n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    let mut cfg = GeneratorConfig::default();
    if let Some(n) = g.res {
        cfg.resolution = (n, n);
    }
    if a.no_mirror {
        cfg = cfg.without_mirror();
    }
    ensure_dir(&a.out)?;
    (0..a.n)
        .into_par_iter()
        .try_for_each(|k| -> anyhow::Result<()> {
            let seed = g.seed.wrapping_add(k);
            let spec =
                generate_scene(seed, &cfg).with_context(|| format!("generating scene {k}"))?;
            let dir = a.out.join(scene_dir_name(k));
            ensure_dir(&dir)?;
            spec.save(&dir.join("scene.json"))?;
            render_scene(g, &spec, &dir.join("transient.sb3d"), false, seed)
                .with_context(|| format!("rendering scene {k}"))
        })?;
    let m = Manifest::build(&a.out, g.seed, MANIFEST)?;
    m.save(&a.out.join(MANIFEST))?;
    println!("{} scenes, {} artifacts", a.n, m.entries.len());
    Ok(())
}

use crate::common::{ensure_dir, invalid, Globals};
use bounce_core::io::{gray_to_pgm, read_shadow_masks, read_tof};
use bounce_core::render::render_light_in_flight;
use serde_json::json;
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long)]
    pub tof: PathBuf,

    /// Directory of per-spot shadow masks.
    #[arg(long)]
    pub shadows: PathBuf,

    /// Only this spot; all spots summed otherwise.
    #[arg(long)]
    pub spot: Option<usize>,

    /// Output directory for frameNNNN.pgm and frames.json.
    #[arg(long)]
    pub out: PathBuf,
}

/// One 8-bit frame per time bin between the first and last lit bin. Each
/// frame is scaled by its own maximum, recorded in `frames.json`.
pub fn run(g: &Globals, a: Args) -> anyhow::Result<()> {
    let tof = read_tof(&a.tof)?;
    let masks = read_shadow_masks(&a.shadows)?;
    let cfg = g.cube()?;
    let cubes = render_light_in_flight(&tof, &masks, &cfg)?;
    let chosen: Vec<_> = match a.spot {
        Some(s) if s >= cubes.len() => {
            return Err(invalid(format!(
                "spot {s} out of range ({} spots)",
                cubes.len()
            )))
        }
        Some(s) => vec![&cubes[s]],
        None => cubes.iter().collect(),
    };
    let (n_x, n_y, n_t) = (tof.n_x, tof.n_y, cfg.n_t);
    let mut sum = vec![0.0f64; n_x * n_y * n_t];
    for c in chosen {
        for (acc, &v) in sum.iter_mut().zip(&c.data) {
            *acc += v as f64;
        }
    }
    let frame = |k: usize| -> Vec<f64> { (0..n_x * n_y).map(|p| sum[p * n_t + k]).collect() };
    let lit: Vec<usize> = (0..n_t)
        .filter(|&k| frame(k).iter().any(|&v| v > 0.0))
        .collect();

    ensure_dir(&a.out)?;
    let mut meta = Vec::new();
    if let (Some(&first), Some(&last)) = (lit.first(), lit.last()) {
        for k in first..=last {
            let f = frame(k);
            let max = f.iter().copied().fold(0.0, f64::max);
            let name = format!("frame{k:04}.pgm");
            std::fs::write(a.out.join(&name), gray_to_pgm(n_x, n_y, &f, max))?;
            meta.push(
                json!({ "file": name, "bin": k, "path_m": cfg.bin_center_path(k), "max": max }),
            );
        }
    }
    let sidecar = json!({
        "normalization": "per_frame_max",
        "delta_ps": cfg.delta_ps,
        "gate_path_min_m": cfg.gate_path_min,
        "n_x": n_x,
        "n_y": n_y,
        "frames": meta,
    });
    std::fs::write(
        a.out.join("frames.json"),
        serde_json::to_string_pretty(&sidecar)? + "\n",
    )?;
    println!("{} frames", lit.last().map_or(0, |l| l - lit[0] + 1));
    Ok(())
}

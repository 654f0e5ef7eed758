use super::reconstruct::{read_views, view_file, Unknown, GRID_FILE};
use crate::common::{invalid, Globals};
use bounce_core::carve::{interior_cells, scene_depth, voxelize_scene};
use bounce_core::demux::DepthMap;
use bounce_core::io::{read_depth, read_grid, read_mask, read_shadow_masks, read_transient};
use bounce_core::metrics::{
    depth_metrics, loss_diagnostics, mask_metrics, reconstruction_metrics, MetricConfig,
    MetricsReport,
};
use std::path::{Path, PathBuf};

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, requires = "gt_depth")]
    pub pred_depth: Option<PathBuf>,

    #[arg(long, requires = "pred_depth")]
    pub gt_depth: Option<PathBuf>,

    /// Cube whose time-integrated intensity weights the smoothness term;
    /// enables l_data and l_smooth.
    #[arg(long, requires = "pred_depth")]
    pub transient: Option<PathBuf>,

    /// Mask PGM, or a directory of shadow masks scored jointly.
    #[arg(long, requires = "gt_mask")]
    pub pred_mask: Option<PathBuf>,

    #[arg(long, requires = "pred_mask")]
    pub gt_mask: Option<PathBuf>,

    /// Reconstruction directory; scored against `--scene`.
    #[arg(long, requires = "scene")]
    pub recon: Option<PathBuf>,

    #[arg(long)]
    pub scene: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Unknown::Empty)]
    pub unknown: Unknown,

    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_mask(p: &Path) -> anyhow::Result<(usize, usize, Vec<bool>)> {
    if p.is_dir() {
        let m = read_shadow_masks(p)?;
        return Ok((m.n_x, m.n_y, m.masks.concat()));
    }
    Ok(read_mask(p)?)
}

pub fn run(g: &Globals, a: Args) -> anyhow::Result<()> {
    let cfg = MetricConfig::default();
    let mut report = MetricsReport::default();

    if let (Some(p), Some(t)) = (&a.pred_depth, &a.gt_depth) {
        let (pred, gt) = (read_depth(p)?, read_depth(t)?);
        let (mae, f1) = depth_metrics(&pred, &gt, &cfg)?;
        report.depth_mae = Some(mae);
        report.boundary_f1 = Some(f1);
        if let Some(c) = &a.transient {
            let terms = loss_diagnostics(&pred, &gt, &read_transient(c)?.intensity(), &cfg)?;
            report.l_data = Some(terms.l_data);
            report.l_smooth = Some(terms.l_smooth);
        }
    }

    if let (Some(p), Some(t)) = (&a.pred_mask, &a.gt_mask) {
        let (px, py, pred) = load_mask(p)?;
        let (gx, gy, gt) = load_mask(t)?;
        if (px, py) != (gx, gy) || pred.len() != gt.len() {
            return Err(invalid(
                "predicted and ground-truth masks differ in shape or count",
            ));
        }
        let (mae, iou) = mask_metrics(&pred, &gt)?;
        report.mask_pixel_mae = Some(mae);
        report.mask_iou = Some(iou);
    }

    if let (Some(dir), Some(s)) = (&a.recon, &a.scene) {
        let spec = g.load_scene(s)?;
        let scene = spec.scene()?;
        let grid = read_grid(&dir.join(GRID_FILE))?;
        let gt = voxelize_scene(&scene, grid.dims)?;
        let domain = interior_cells(&grid, 2);
        let views = read_views(dir).unwrap_or_default();
        let mut novel = Vec::new();
        let mut refs: Vec<DepthMap> = Vec::new();
        for (k, cam) in views.iter().enumerate() {
            novel.push(read_depth(&dir.join(view_file(k)))?);
            refs.push(scene_depth(&scene, cam)?);
        }
        let scores = reconstruction_metrics(
            &grid,
            &gt,
            Some(&domain),
            a.unknown.into(),
            &novel,
            &refs,
            &cfg,
        )?;
        report.voxel_iou = Some(scores.voxel_iou);
        if report.depth_mae.is_none() {
            report.depth_mae = scores.depth_mae;
            report.boundary_f1 = scores.boundary_f1;
        }
    }

    let json = report.to_json()? + "\n";
    match &a.out {
        Some(p) => std::fs::write(p, json)?,
        None => print!("{json}"),
    }
    Ok(())
}

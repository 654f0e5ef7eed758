use super::depth::depth_metrics;
use super::MetricConfig;
use crate::carve::{Cell, OccupancyGrid, UnknownPolicy};
use crate::demux::DepthMap;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// IoU of occupied cells over `domain` (all cells when `None`). Unknown
/// predicted cells count as occupied under [`UnknownPolicy::Occupied`].
pub fn voxel_iou(
    pred: &OccupancyGrid,
    gt: &OccupancyGrid,
    domain: Option<&[bool]>,
    policy: UnknownPolicy,
) -> Result<f64> {
    if !pred.same_layout(gt) {
        return Err(Error::GeometryMismatch(format!(
            "grid {:?} against {:?}",
            pred.dims, gt.dims
        )));
    }
    if domain.is_some_and(|d| d.len() != pred.len()) {
        return Err(Error::GeometryMismatch(
            "domain mask size differs from the grid".into(),
        ));
    }
    let occupied =
        |c: Cell| c == Cell::Occupied || (c == Cell::Unknown && policy == UnknownPolicy::Occupied);
    let (mut inter, mut union) = (0usize, 0usize);
    for i in 0..pred.len() {
        if domain.is_some_and(|d| !d[i]) {
            continue;
        }
        let (a, b) = (occupied(pred.cells[i]), gt.cells[i] == Cell::Occupied);
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionScores {
    pub voxel_iou: f64,
    /// Averages over novel views; `None` without views.
    pub depth_mae: Option<f64>,
    pub boundary_f1: Option<f64>,
}

/// Voxel IoU plus depth metrics averaged over novel views.
pub fn reconstruction_metrics(
    pred: &OccupancyGrid,
    gt: &OccupancyGrid,
    domain: Option<&[bool]>,
    policy: UnknownPolicy,
    novel: &[DepthMap],
    gt_depths: &[DepthMap],
    cfg: &MetricConfig,
) -> Result<ReconstructionScores> {
    let voxel_iou = voxel_iou(pred, gt, domain, policy)?;
    if novel.len() != gt_depths.len() {
        return Err(Error::InvalidInput(format!(
            "{} novel views for {} references",
            novel.len(),
            gt_depths.len()
        )));
    }
    let mut scores = Vec::with_capacity(novel.len());
    for (p, g) in novel.iter().zip(gt_depths) {
        scores.push(depth_metrics(p, g, cfg)?);
    }
    let avg = |f: fn(&(f64, f64)) -> f64| {
        (!scores.is_empty()).then(|| scores.iter().map(f).sum::<f64>() / scores.len() as f64)
    };
    Ok(ReconstructionScores {
        voxel_iou,
        depth_mae: avg(|s| s.0),
        boundary_f1: avg(|s| s.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    #[test]
    fn unknown_policy_counts() {
        let pred = OccupancyGrid::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), [4, 4, 4]).unwrap();
        let mut gt = pred.clone();
        for i in 0..gt.len() {
            gt.cells[i] = if i % 5 == 0 {
                Cell::Occupied
            } else {
                Cell::Empty
            };
        }
        let expected = gt.count(Cell::Occupied) as f64 / gt.len() as f64;
        assert_eq!(
            voxel_iou(&pred, &gt, None, UnknownPolicy::Occupied).unwrap(),
            expected
        );
        assert_eq!(
            voxel_iou(&pred, &gt, None, UnknownPolicy::Empty).unwrap(),
            0.0
        );
        assert_eq!(
            voxel_iou(&gt, &gt, None, UnknownPolicy::Occupied).unwrap(),
            1.0
        );
    }
}

use super::MetricConfig;
use crate::demux::DepthMap;
use crate::error::{Error, Result};

fn check_shapes(pred: &DepthMap, gt: &DepthMap) -> Result<()> {
    if !pred.same_shape(gt) {
        return Err(Error::GeometryMismatch(format!(
            "{}x{} prediction against {}x{} ground truth",
            pred.n_x, pred.n_y, gt.n_x, gt.n_y
        )));
    }
    Ok(())
}

/// Depth edges: pixel `p` is an edge when the forward difference to its
/// right or lower neighbour, relative to the map's depth range over
/// `domain`, exceeds `threshold`. Only pairs inside `domain` count.
pub fn depth_edges(depth: &DepthMap, domain: &[bool], threshold: f64) -> Vec<bool> {
    let (nx, ny) = (depth.n_x, depth.n_y);
    let vals = || {
        (0..depth.len())
            .filter(|&p| domain[p])
            .map(|p| depth.depth[p])
    };
    let lo = vals().fold(f64::INFINITY, f64::min);
    let hi = vals().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let mut edges = vec![false; depth.len()];
    if !(range > 0.0) {
        return edges;
    }
    for v in 0..ny {
        for u in 0..nx {
            let p = v * nx + u;
            if !domain[p] {
                continue;
            }
            let step =
                |q: usize| domain[q] && (depth.depth[q] - depth.depth[p]).abs() / range > threshold;
            edges[p] = (u + 1 < nx && step(p + 1)) || (v + 1 < ny && step(p + nx));
        }
    }
    edges
}

/// Fraction of `a`'s edge pixels with an edge of `b` within Chebyshev
/// distance `tol`; `None` when `a` has no edges.
fn matched_fraction(a: &[bool], b: &[bool], nx: usize, ny: usize, tol: usize) -> Option<f64> {
    let total = a.iter().filter(|&&e| e).count();
    if total == 0 {
        return None;
    }
    let t = tol as isize;
    let hit = (0..a.len())
        .filter(|&p| a[p])
        .filter(|&p| {
            let (u, v) = ((p % nx) as isize, (p / nx) as isize);
            (-t..=t).any(|dv| {
                (-t..=t).any(|du| {
                    let (x, y) = (u + du, v + dv);
                    x >= 0
                        && y >= 0
                        && (x as usize) < nx
                        && (y as usize) < ny
                        && b[y as usize * nx + x as usize]
                })
            })
        })
        .count();
    Some(hit as f64 / total as f64)
}

/// F1 of predicted against ground-truth edges matched within `tol` pixels.
/// Two edge-free maps score 1.
pub fn boundary_f1(
    pred_edges: &[bool],
    gt_edges: &[bool],
    nx: usize,
    ny: usize,
    tol: usize,
) -> f64 {
    match (
        matched_fraction(pred_edges, gt_edges, nx, ny, tol),
        matched_fraction(gt_edges, pred_edges, nx, ny, tol),
    ) {
        (None, None) => 1.0,
        (Some(p), Some(r)) if p + r > 0.0 => 2.0 * p * r / (p + r),
        _ => 0.0,
    }
}

/// Mean absolute depth error and boundary F1 over mutually valid pixels.
pub fn depth_metrics(pred: &DepthMap, gt: &DepthMap, cfg: &MetricConfig) -> Result<(f64, f64)> {
    check_shapes(pred, gt)?;
    let both: Vec<bool> = pred
        .valid
        .iter()
        .zip(&gt.valid)
        .map(|(a, b)| *a && *b)
        .collect();
    let n = both.iter().filter(|&&b| b).count();
    if n == 0 {
        return Err(Error::NoOverlap);
    }
    let mae = (0..pred.len())
        .filter(|&p| both[p])
        .map(|p| (pred.depth[p] - gt.depth[p]).abs())
        .sum::<f64>()
        / n as f64;
    let pe = depth_edges(pred, &both, cfg.edge_threshold);
    let ge = depth_edges(gt, &both, cfg.edge_threshold);
    Ok((
        mae,
        boundary_f1(&pe, &ge, pred.n_x, pred.n_y, cfg.boundary_tolerance),
    ))
}

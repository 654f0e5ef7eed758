use super::MetricConfig;
use crate::demux::DepthMap;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn window_ssim(a: &[f64], b: &[f64], c1: f64, c2: f64) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    // Unbiased (co)variances.
    let dof = (n - 1.0).max(1.0);
    let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        va += dx * dx;
        vb += dy * dy;
        cov += dx * dy;
    }
    let (va, vb, cov) = (va / dof, vb / dof, cov / dof);
    ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
}

/// Mean SSIM over every `window x window` patch in which both images are
/// valid, with constants `(k1 L)^2` and `(k2 L)^2`. When no full patch
/// fits, the valid pixels are scored as one patch; with none it is 1.
pub fn ssim(
    a: &[f64],
    b: &[f64],
    valid: &[bool],
    nx: usize,
    ny: usize,
    window: usize,
    data_range: f64,
) -> f64 {
    let c1 = (SSIM_K1 * data_range).powi(2);
    let c2 = (SSIM_K2 * data_range).powi(2);
    let w = window.max(1);
    let (mut sum, mut count) = (0.0, 0usize);
    let (mut pa, mut pb) = (Vec::with_capacity(w * w), Vec::with_capacity(w * w));
    if nx >= w && ny >= w {
        for v0 in 0..=ny - w {
            for u0 in 0..=nx - w {
                pa.clear();
                pb.clear();
                let full = (v0..v0 + w).all(|v| (u0..u0 + w).all(|u| valid[v * nx + u]));
                if !full {
                    continue;
                }
                for v in v0..v0 + w {
                    for u in u0..u0 + w {
                        pa.push(a[v * nx + u]);
                        pb.push(b[v * nx + u]);
                    }
                }
                sum += window_ssim(&pa, &pb, c1, c2);
                count += 1;
            }
        }
    }
    if count > 0 {
        return sum / count as f64;
    }
    let idx: Vec<usize> = (0..a.len()).filter(|&p| valid[p]).collect();
    if idx.is_empty() {
        return 1.0;
    }
    let pa: Vec<f64> = idx.iter().map(|&p| a[p]).collect();
    let pb: Vec<f64> = idx.iter().map(|&p| b[p]).collect();
    window_ssim(&pa, &pb, c1, c2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub l_data: f64,
    pub l_smooth: f64,
}

/// Training-loss terms evaluated on a prediction.
///
/// `l_data = alpha (1 - SSIM) + (1 - alpha) mean |d - d_hat|` over mutually
/// valid pixels. `l_smooth = beta (mean_x + mean_y)` where `mean_x` averages
/// `|dx d_hat| exp(-|dx I|)` over horizontal forward differences with both
/// predicted pixels valid, likewise `mean_y`. `intensity` is normalized by
/// its maximum before differencing.
pub fn loss_diagnostics(
    pred: &DepthMap,
    gt: &DepthMap,
    intensity: &[f64],
    cfg: &MetricConfig,
) -> Result<LossTerms> {
    if !pred.same_shape(gt) || intensity.len() != pred.len() {
        return Err(Error::GeometryMismatch(
            "prediction, ground truth and intensity differ in size".into(),
        ));
    }
    let (nx, ny) = (pred.n_x, pred.n_y);
    let both: Vec<bool> = pred
        .valid
        .iter()
        .zip(&gt.valid)
        .map(|(a, b)| *a && *b)
        .collect();
    let n = both.iter().filter(|&&b| b).count();
    let l_data = if n == 0 {
        0.0
    } else {
        let l1 = (0..pred.len())
            .filter(|&p| both[p])
            .map(|p| (pred.depth[p] - gt.depth[p]).abs())
            .sum::<f64>()
            / n as f64;
        let range = (0..gt.len())
            .filter(|&p| both[p])
            .map(|p| gt.depth[p])
            .fold(0.0, f64::max);
        let s = ssim(
            &gt.depth,
            &pred.depth,
            &both,
            nx,
            ny,
            cfg.ssim_window,
            range,
        );
        cfg.alpha * (1.0 - s) + (1.0 - cfg.alpha) * l1
    };

    let peak = intensity.iter().copied().fold(0.0, f64::max);
    let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
    let term = |p: usize, q: usize| -> Option<f64> {
        (pred.valid[p] && pred.valid[q]).then(|| {
            (pred.depth[q] - pred.depth[p]).abs()
                * (-(intensity[q] - intensity[p]).abs() * scale).exp()
        })
    };
    let mean = |it: &mut dyn Iterator<Item = f64>| {
        let (s, c) = it.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
        if c == 0 {
            0.0
        } else {
            s / c as f64
        }
    };
    let mx = mean(
        &mut (0..ny)
            .flat_map(|v| (0..nx.saturating_sub(1)).map(move |u| v * nx + u))
            .filter_map(|p| term(p, p + 1)),
    );
    let my = mean(&mut (0..ny.saturating_sub(1) * nx).filter_map(|p| term(p, p + nx)));
    Ok(LossTerms {
        l_data,
        l_smooth: cfg.beta * (mx + my),
    })
}

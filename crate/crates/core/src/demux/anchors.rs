use super::tof::DepthMap;
use crate::error::{Error, Result};

/// Least-squares `(a, b)` minimizing `sum (a * rel + b - metric)^2`.
pub fn fit_anchors(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return Err(Error::RankDeficient);
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > f64::EPSILON * mx.abs().max(1.0) * n) {
        return Err(Error::RankDeficient);
    }
    let a = sxy / sxx;
    Ok((a, my - a * mx))
}

/// Rescales a relative depth map to metric using anchors given as
/// `(pixel, metric depth)`.
pub fn rescale_with_anchors(relative: &DepthMap, anchors: &[(usize, f64)]) -> Result<DepthMap> {
    let pairs = anchors
        .iter()
        .map(|&(pix, metric)| {
            if pix >= relative.len() {
                return Err(Error::InvalidInput(format!(
                    "anchor pixel {pix} out of range"
                )));
            }
            relative.get(pix).map(|r| (r, metric)).ok_or_else(|| {
                Error::InvalidInput(format!("anchor pixel {pix} has no relative depth"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (a, b) = fit_anchors(&pairs)?;
    let depth = relative
        .depth
        .iter()
        .zip(&relative.valid)
        .map(|(&d, &v)| if v { a * d + b } else { 0.0 })
        .collect();
    Ok(DepthMap {
        depth,
        ..relative.clone()
    })
}

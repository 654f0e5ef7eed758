use crate::error::{Error, Result};

/// Intersection over union of two binary sets; an empty union scores 1.
pub fn iou(pred: &[bool], gt: &[bool]) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&a, &b) in pred.iter().zip(gt) {
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Pixel mean absolute error and IoU of two aligned binary masks.
pub fn mask_metrics(pred: &[bool], gt: &[bool]) -> Result<(f64, f64)> {
    if pred.len() != gt.len() {
        return Err(Error::GeometryMismatch(format!(
            "mask of {} pixels against {}",
            pred.len(),
            gt.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidInput("empty masks".into()));
    }
    let diff = pred.iter().zip(gt).filter(|(a, b)| a != b).count();
    Ok((diff as f64 / pred.len() as f64, iou(pred, gt)))
}

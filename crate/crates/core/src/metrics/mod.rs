//! Evaluation: depth error and boundary F1, mask scores, the training-loss
//! terms as diagnostics, and voxel reconstruction scores.

mod depth;
mod loss;
mod mask;
mod voxel;

pub use depth::{boundary_f1, depth_edges, depth_metrics};
pub use loss::{loss_diagnostics, ssim, LossTerms, SSIM_K1, SSIM_K2};
pub use mask::{iou, mask_metrics};
pub use voxel::{reconstruction_metrics, voxel_iou, ReconstructionScores};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// SSIM weight in the data term.
    pub alpha: f64,
    /// Smoothness weight.
    pub beta: f64,
    pub ssim_window: usize,
    /// Depth step, as a fraction of the map's depth range, that marks an
    /// edge between neighbouring pixels.
    pub edge_threshold: f64,
    /// Pixels within which predicted and true edges match.
    pub boundary_tolerance: usize,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            alpha: 0.15,
            beta: 1e-3,
            ssim_window: 7,
            edge_threshold: 0.05,
            boundary_tolerance: 1,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidInput(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta {} must be non-negative",
                self.beta
            )));
        }
        if self.ssim_window == 0 || !(self.edge_threshold > 0.0) {
            return Err(Error::InvalidInput(
                "SSIM window and edge threshold must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Evaluation summary; metrics that were not computed serialize as `null`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub depth_mae: Option<f64>,
    pub boundary_f1: Option<f64>,
    pub mask_pixel_mae: Option<f64>,
    pub mask_iou: Option<f64>,
    pub l_data: Option<f64>,
    pub l_smooth: Option<f64>,
    pub voxel_iou: Option<f64>,
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

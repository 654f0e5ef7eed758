//! Analytic inversion of transient measurements: peak extraction,
//! two-bounce time-of-flight maps, depth, shadow masks, specular pixels and
//! anchor rescaling.

mod anchors;
mod depth;
mod peaks;
mod shadows;
mod specular;
mod tof;
mod unmix;

pub use anchors::{fit_anchors, rescale_with_anchors};
pub use depth::{
    candidate_interval, depth_by_mode, depth_candidates, depth_from_multiplexed,
    depth_from_scanned, interval_vote, invert_path, mode_depth, DemuxConfig, RangeEstimate,
};
pub use peaks::{extract_peaks, Peak};
pub use shadows::{collision_pixels, demux_shadows, shadow_transient, window_bins, window_mass};
pub use specular::{detect_specular, SpecularConfig};
pub use tof::{two_bounce_path, two_bounce_tof, unproject, DepthMap, TofMapSet};
pub use unmix::{estimate_normals, unmix_shadows, MAX_CLUSTER};

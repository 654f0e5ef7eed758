//! Deterministic forward model: laser spots, primary-ray buffers, shadow
//! masks, multiplexed multi-bounce transients, calibrated captures,
//! light-in-flight cubes and the detector model.

mod calibrated;
mod cube;
mod rig;
mod sensor;
mod spots;
mod transient;

pub use calibrated::{render_calibrated, render_calibrated_spots, render_light_in_flight};
pub use cube::{CubeConfig, GatePolicy, TransientCube};
pub use rig::{spot_pixels, Camera, LidarRig};
pub use sensor::{
    apply_sensor_model, exgaussian_pulse, gaussian_bin_kernel, measure_fwhm, poisson_sample,
    SensorModel, FWHM_PER_SIGMA, PAPER_JITTER_FWHM_S, PAPER_PEAK_COUNTS,
};
pub use spots::{trace_spots, Spot, SpotSet, VirtualSource};
pub use transient::{
    illuminates, render_gbuffer, render_scanned, render_shadow_masks, render_transient, Deposit,
    Families, GBuffer, PathFamily, RenderConfig, Renderer, ShadowMaskSet, DEFAULT_LASER_POWER,
    FACING_EPSILON,
};

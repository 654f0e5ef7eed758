use super::depth::DemuxConfig;
use super::tof::TofMapSet;
use crate::error::{Error, Result};
use crate::render::{CubeConfig, ShadowMaskSet, TransientCube};
use rayon::prelude::*;

/// `max(calibrated - measured, 0)` element-wise.
pub fn shadow_transient(
    measured: &TransientCube,
    calibrated: &TransientCube,
) -> Result<TransientCube> {
    measured.check_geometry(calibrated)?;
    let data = calibrated
        .data
        .par_iter()
        .zip(measured.data.par_iter())
        .map(|(&c, &m)| (c - m).max(0.0))
        .collect();
    Ok(TransientCube {
        data,
        ..measured.clone()
    })
}

/// Bins whose centers lie within `tolerance_bins` of continuous position
/// `pos`, clipped to the gate. Empty when the window misses the gate.
pub fn window_bins(cfg: &CubeConfig, pos: f64, tolerance_bins: f64) -> std::ops::Range<usize> {
    let lo = (pos - tolerance_bins - 0.5).ceil().max(0.0);
    let hi = (pos + tolerance_bins - 0.5).floor() + 1.0;
    let hi = hi.min(cfg.n_t as f64);
    if !(hi > lo) {
        return 0..0;
    }
    lo as usize..hi as usize
}

/// Measured mass in the window around pathlength `path`, or `None` when the
/// window falls outside the gate.
pub fn window_mass(hist: &[f32], cfg: &CubeConfig, path: f64, tolerance_bins: f64) -> Option<f64> {
    let w = window_bins(cfg, cfg.position(path), tolerance_bins);
    (!w.is_empty()).then(|| hist[w].iter().map(|&v| v as f64).sum())
}

/// Spot `i` lights pixel `p` iff the measurement holds at least
/// `min_amplitude` within `tolerance_bins` of the spot's two-bounce time.
/// Pixels without a usable prediction (invalid depth, out of gate) are
/// reported lit.
pub fn demux_shadows(
    measured: &TransientCube,
    tof: &TofMapSet,
    cfg: &DemuxConfig,
) -> Result<ShadowMaskSet> {
    if measured.n_x != tof.n_x || measured.n_y != tof.n_y {
        return Err(Error::GeometryMismatch(
            "cube and ToF map resolutions differ".into(),
        ));
    }
    let cube_cfg = measured.config();
    let n_x = tof.n_x;
    let masks = (0..tof.len())
        .map(|s| {
            (0..n_x * tof.n_y)
                .into_par_iter()
                .map(|pix| {
                    let Some(path) = tof.path(s, pix) else {
                        return true;
                    };
                    let hist = measured.histogram(pix % n_x, pix / n_x);
                    window_mass(hist, &cube_cfg, path, cfg.tolerance_bins)
                        .is_none_or(|m| m >= cfg.min_amplitude)
                })
                .collect()
        })
        .collect();
    Ok(ShadowMaskSet {
        n_x,
        n_y: tof.n_y,
        masks,
    })
}

/// Pixels where some pair of spots has two-bounce positions closer than
/// `2 * tolerance_bins`, so one spot's return can fall inside the other's
/// window.
pub fn collision_pixels(tof: &TofMapSet, cube: &CubeConfig, tolerance_bins: f64) -> Vec<bool> {
    (0..tof.n_x * tof.n_y)
        .into_par_iter()
        .map(|pix| {
            let mut pos: Vec<f64> = (0..tof.len())
                .filter_map(|s| tof.path(s, pix))
                .map(|p| cube.position(p))
                .collect();
            pos.sort_by(f64::total_cmp);
            pos.windows(2).any(|w| w[1] - w[0] <= 2.0 * tolerance_bins)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::GatePolicy;

    fn cfg() -> CubeConfig {
        CubeConfig {
            n_t: 32,
            delta_ps: 128.0,
            gate_path_min: 0.0,
            out_of_gate: GatePolicy::Error,
        }
    }

    #[test]
    fn window_covers_neighbouring_centers() {
        assert_eq!(window_bins(&cfg(), 10.5, 1.0), 9..12);
        assert_eq!(window_bins(&cfg(), 10.2, 1.0), 9..11);
        assert_eq!(window_bins(&cfg(), 0.1, 1.0), 0..1);
        assert!(window_bins(&cfg(), 40.0, 1.0).is_empty());
    }

    #[test]
    fn self_difference_is_zero() {
        let mut c = TransientCube::zeros(2, 2, &cfg());
        c.data
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = (i % 7) as f32);
        let z = shadow_transient(&c, &c).unwrap();
        assert!(z.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn negative_residual_is_clamped() {
        let cal = TransientCube::zeros(1, 1, &cfg());
        let mut m = cal.clone();
        m.data[3] = 2.0;
        assert!(shadow_transient(&m, &cal)
            .unwrap()
            .data
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn mismatched_geometry_is_rejected() {
        let a = TransientCube::zeros(1, 1, &cfg());
        let b = TransientCube::zeros(2, 1, &cfg());
        assert!(shadow_transient(&a, &b).is_err());
    }
}

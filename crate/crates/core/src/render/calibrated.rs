use super::cube::{CubeConfig, PixelAccumulator, TransientCube};
use super::transient::ShadowMaskSet;
use crate::demux::TofMapSet;
use crate::error::{Error, Result};
use crate::geometry::SPEED_OF_LIGHT;
use rayon::prelude::*;

fn render_unit_deposits<F>(
    tof: &TofMapSet,
    spots: &[usize],
    cfg: &CubeConfig,
    include: F,
) -> Result<TransientCube>
where
    F: Fn(usize, usize) -> bool + Sync,
{
    cfg.validate()?;
    let mut cube = TransientCube::zeros(tof.n_x, tof.n_y, cfg);
    let n_t = cfg.n_t;
    cube.data
        .par_chunks_mut(n_t)
        .enumerate()
        .try_for_each_init(
            || PixelAccumulator::new(n_t),
            |acc, (pix, hist)| {
                if !tof.valid[pix] {
                    return Ok(());
                }
                for &s in spots {
                    if include(s, pix) {
                        let t = tof.maps[s][pix];
                        if !t.is_finite() {
                            return Err(Error::InvalidInput(format!(
                                "non-finite ToF at spot {s}, pixel {pix}"
                            )));
                        }
                        acc.deposit(cfg, t * SPEED_OF_LIGHT, 1.0)?;
                    }
                    acc.flush(hist);
                }
                Ok(())
            },
        )?;
    Ok(cube)
}

/// Occlusion-free calibrated capture with unit amplitude for every spot:
/// one unit deposit per spot at each valid pixel's two-bounce time.
pub fn render_calibrated(tof: &TofMapSet, cfg: &CubeConfig) -> Result<TransientCube> {
    let all: Vec<usize> = (0..tof.len()).collect();
    render_unit_deposits(tof, &all, cfg, |_, _| true)
}

/// Calibrated capture restricted to the listed spots.
pub fn render_calibrated_spots(
    tof: &TofMapSet,
    spots: &[usize],
    cfg: &CubeConfig,
) -> Result<TransientCube> {
    render_unit_deposits(tof, spots, cfg, |_, _| true)
}

/// Per-spot two-bounce cubes whose amplitude is the lighting mask: each lit
/// pixel carries a unit deposit at its two-bounce time.
pub fn render_light_in_flight(
    tof: &TofMapSet,
    shadows: &ShadowMaskSet,
    cfg: &CubeConfig,
) -> Result<Vec<TransientCube>> {
    if shadows.len() != tof.len() || shadows.n_x != tof.n_x || shadows.n_y != tof.n_y {
        return Err(Error::GeometryMismatch(
            "shadow masks and ToF maps are not aligned".into(),
        ));
    }
    (0..tof.len())
        .map(|s| render_unit_deposits(tof, &[s], cfg, |s, pix| shadows.masks[s][pix]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::GatePolicy;

    fn cfg() -> CubeConfig {
        CubeConfig {
            n_t: 64,
            delta_ps: 128.0,
            gate_path_min: 1.0,
            out_of_gate: GatePolicy::Error,
        }
    }

    fn tof(spots: usize) -> TofMapSet {
        let n = 9;
        let maps = (0..spots)
            .map(|s| {
                (0..n)
                    .map(|p| (1.2 + 0.05 * s as f64 + 0.013 * p as f64) / SPEED_OF_LIGHT)
                    .collect()
            })
            .collect();
        TofMapSet {
            n_x: 3,
            n_y: 3,
            maps,
            valid: vec![true; n],
        }
    }

    #[test]
    fn single_spot_unit_mass() {
        let cube = render_calibrated(&tof(1), &cfg()).unwrap();
        for m in cube.intensity() {
            assert!((m - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn many_spots_total_mass() {
        let cube = render_calibrated(&tof(25), &cfg()).unwrap();
        for m in cube.intensity() {
            assert!((m - 25.0).abs() < 1e-4);
        }
    }

    #[test]
    fn fully_shadowed_spot_gives_empty_cube() {
        let t = tof(2);
        let mut masks = ShadowMaskSet::all_lit(3, 3, 2);
        masks.masks[1] = vec![false; 9];
        let lif = render_light_in_flight(&t, &masks, &cfg()).unwrap();
        assert!(lif[1].data.iter().all(|&v| v == 0.0));
        assert!(lif[0].total() > 8.99);
    }

    #[test]
    fn invalid_pixels_are_skipped() {
        let mut t = tof(1);
        t.valid[4] = false;
        let cube = render_calibrated(&t, &cfg()).unwrap();
        assert_eq!(cube.intensity()[4], 0.0);
    }
}

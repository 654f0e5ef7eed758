use super::peaks::extract_peaks;
use super::tof::DepthMap;
use crate::error::{Error, Result};
use crate::geometry::{ellipsoid_depth, Room};
use crate::render::{CubeConfig, LidarRig, SpotSet, TransientCube};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Thresholds shared by the demultiplexing operations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemuxConfig {
    /// Half-width, in bins, of the window searched around an expected time.
    pub tolerance_bins: f64,
    /// Smallest window mass or peak height counted as a return.
    pub min_amplitude: f64,
    pub min_separation_bins: usize,
    /// Width of the depth-candidate histogram in multiplexed mode; `None`
    /// uses the path bin width `c delta`.
    pub depth_bin_size: Option<f64>,
    /// Depth candidates must lie in `(0, max_depth)`.
    pub max_depth: f64,
}

impl Default for DemuxConfig {
    fn default() -> Self {
        DemuxConfig {
            tolerance_bins: 1.0,
            min_amplitude: 1e-6,
            min_separation_bins: 1,
            depth_bin_size: None,
            max_depth: f64::INFINITY,
        }
    }
}

impl DemuxConfig {
    /// Defaults with depth bounded by the room diagonal.
    pub fn for_room(room: &Room) -> DemuxConfig {
        DemuxConfig {
            max_depth: room.diagonal(),
            ..DemuxConfig::default()
        }
    }

    /// Detection floor for a noisy measurement with mean background
    /// `background` photons per bin.
    pub fn noisy(room: &Room, background: f64) -> DemuxConfig {
        DemuxConfig {
            min_amplitude: 3.0 * background.max(1.0).sqrt(),
            ..DemuxConfig::for_room(room)
        }
    }

    pub fn bin_size(&self, cube: &CubeConfig) -> f64 {
        self.depth_bin_size.unwrap_or_else(|| cube.bin_path())
    }
}

/// A range estimate along one pixel ray, with its sensitivity to path
/// error (`d range / d path`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeEstimate {
    pub range: f64,
    pub gain: f64,
}

/// Inverts a measured pathlength at pixel `pix` under the hypothesis that
/// it came from spot `s`.
///
/// At the pixel that images the spot's re-radiating point the return is
/// one-bounce: for a directly lit spot the point lies on the ellipsoid with
/// foci at the laser and the sensor (the confocal case when they coincide);
/// for a mirror spot the sensor leg is the path minus the laser leg.
/// Elsewhere the return is two-bounce and the focus is the spot itself.
pub fn invert_path(
    rig: &LidarRig,
    spots: &SpotSet,
    s: usize,
    pix: usize,
    path: f64,
) -> Result<RangeEstimate> {
    let cam = &rig.camera;
    let (u, v) = (pix % cam.n_x, pix / cam.n_x);
    let dir = cam.pixel_dir(u, v);
    let spot = &spots[s];
    let own = cam.project(spot.source.point) == Some((u, v));
    let focus = if own {
        if spot.is_mirror {
            let range = path - spot.laser_leg;
            if !(range > 0.0) {
                return Err(Error::NoSolution);
            }
            return Ok(RangeEstimate { range, gain: 1.0 });
        }
        rig.laser
    } else {
        spot.source.point
    };
    let l = if own { path } else { path - spot.laser_leg };
    let range = ellipsoid_depth(l, focus, cam.position, dir)?;
    let p = cam.position + dir.get() * range;
    let to_focus = focus - p;
    let n = to_focus.norm();
    let cos = if n > 0.0 { dir.dot(to_focus / n) } else { -1.0 };
    Ok(RangeEstimate {
        range,
        gain: 1.0 / (1.0 - cos).max(1e-12),
    })
}

fn admissible(r: &RangeEstimate, cfg: &DemuxConfig) -> bool {
    r.range > 0.0 && r.range < cfg.max_depth
}

/// Depth from sequential single-spot captures. Per spot, the latest
/// confident peak is taken as the two-bounce return (one-bounce light, when
/// present, arrives earlier) and inverted at its mid-bin pathlength; among
/// spots, the estimate least sensitive to path error wins.
pub fn depth_from_scanned(
    cubes: &[TransientCube],
    rig: &LidarRig,
    spots: &SpotSet,
    cfg: &DemuxConfig,
) -> Result<DepthMap> {
    if cubes.len() != spots.len() {
        return Err(Error::InvalidInput(format!(
            "{} cubes for {} spots",
            cubes.len(),
            spots.len()
        )));
    }
    let Some(first) = cubes.first() else {
        return Err(Error::InvalidInput("no spot captures".into()));
    };
    for c in cubes {
        first.check_geometry(c)?;
    }
    let cam = &rig.camera;
    if first.n_x != cam.n_x || first.n_y != cam.n_y {
        return Err(Error::GeometryMismatch(
            "cube and sensor resolutions differ".into(),
        ));
    }
    let cube_cfg = first.config();
    let est: Vec<Option<f64>> = (0..cam.pixel_count())
        .into_par_iter()
        .map(|pix| {
            let (x, y) = (pix % cam.n_x, pix / cam.n_x);
            let mut best: Option<RangeEstimate> = None;
            for (s, cube) in cubes.iter().enumerate() {
                let peaks = extract_peaks(
                    cube.histogram(x, y),
                    cfg.min_amplitude,
                    cfg.min_separation_bins,
                );
                let Some(last) = peaks.last() else { continue };
                let path = cube_cfg.bin_center_path(last.bin);
                let Ok(r) = invert_path(rig, spots, s, pix, path) else {
                    continue;
                };
                if admissible(&r, cfg) && best.is_none_or(|b| r.gain < b.gain) {
                    best = Some(r);
                }
            }
            best.map(|b| b.range)
        })
        .collect();
    Ok(to_depth_map(cam.n_x, cam.n_y, est))
}

/// All depth candidates at one pixel: every (peak, spot) pairing inverted
/// and bounded to `(0, max_depth)`, sorted ascending.
pub fn depth_candidates(
    cube: &TransientCube,
    rig: &LidarRig,
    spots: &SpotSet,
    pix: usize,
    cfg: &DemuxConfig,
) -> Vec<f64> {
    let cam = &rig.camera;
    let cube_cfg = cube.config();
    let peaks = extract_peaks(
        cube.histogram(pix % cam.n_x, pix / cam.n_x),
        cfg.min_amplitude,
        cfg.min_separation_bins,
    );
    let mut out = Vec::with_capacity(peaks.len() * spots.len());
    for p in &peaks {
        let path = cube_cfg.bin_center_path(p.bin);
        for s in 0..spots.len() {
            if let Ok(r) = invert_path(rig, spots, s, pix, path) {
                if admissible(&r, cfg) {
                    out.push(r.range);
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Mode of sorted candidates discretized at `bin`; ties go to the nearer
/// bin. Returns the mean of the candidates in the winning bin.
pub fn mode_depth(sorted: &[f64], bin: f64) -> Option<f64> {
    let mut best: Option<(i64, usize, usize)> = None; // (bin index, start, count)
    let mut i = 0;
    while i < sorted.len() {
        let b = (sorted[i] / bin).floor() as i64;
        let mut j = i;
        while j < sorted.len() && (sorted[j] / bin).floor() as i64 == b {
            j += 1;
        }
        if best.is_none_or(|(_, _, c)| j - i > c) {
            best = Some((b, i, j - i));
        }
        i = j;
    }
    best.map(|(_, start, count)| sorted[start..start + count].iter().sum::<f64>() / count as f64)
}

/// Depth interval consistent with a peak at bin `bin` for spot `s`: the
/// true pathlength lies within half a bin of the peak's center.
pub fn candidate_interval(
    rig: &LidarRig,
    spots: &SpotSet,
    s: usize,
    pix: usize,
    cube: &CubeConfig,
    bin: usize,
) -> Option<(f64, f64, RangeEstimate)> {
    let c = cube.bin_center_path(bin);
    let half = 0.5 * cube.bin_path();
    let mid = invert_path(rig, spots, s, pix, c).ok()?;
    let a = invert_path(rig, spots, s, pix, c - half)
        .map(|r| r.range)
        .unwrap_or(0.0);
    let b = invert_path(rig, spots, s, pix, c + half)
        .map(|r| r.range)
        .unwrap_or(f64::INFINITY);
    Some((a.min(b), a.max(b), mid))
}

/// Point covered by the most candidate intervals; ties go to the nearer
/// depth. Returns the inversion with the smallest gain among the winning
/// intervals.
pub fn interval_vote(cands: &[(f64, f64, RangeEstimate)]) -> Option<f64> {
    let mut events: Vec<(f64, i32)> = Vec::with_capacity(2 * cands.len());
    for c in cands {
        events.push((c.0, 1));
        events.push((c.1, -1));
    }
    // Openings before closings at equal depth so touching intervals count.
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let (mut cur, mut best, mut at) = (0, 0, None);
    for (d, e) in events {
        cur += e;
        if cur > best {
            best = cur;
            at = Some(d);
        }
    }
    let at = at?;
    cands
        .iter()
        .filter(|c| c.0 <= at && at <= c.1)
        .min_by(|a, b| {
            a.2.gain
                .total_cmp(&b.2.gain)
                .then(a.2.range.total_cmp(&b.2.range))
        })
        .map(|c| c.2.range)
}

fn check_sensor(cube: &TransientCube, rig: &LidarRig) -> Result<()> {
    if cube.n_x != rig.camera.n_x || cube.n_y != rig.camera.n_y {
        return Err(Error::GeometryMismatch(
            "cube and sensor resolutions differ".into(),
        ));
    }
    Ok(())
}

/// Depth from a single multiplexed capture. Every (peak, spot) pairing
/// yields the depth interval consistent with the peak's bin; the depth
/// covered by the most intervals wins.
pub fn depth_from_multiplexed(
    cube: &TransientCube,
    rig: &LidarRig,
    spots: &SpotSet,
    cfg: &DemuxConfig,
) -> Result<DepthMap> {
    check_sensor(cube, rig)?;
    let cam = &rig.camera;
    let cc = cube.config();
    let est: Vec<Option<f64>> = (0..cam.pixel_count())
        .into_par_iter()
        .map(|pix| {
            let peaks = extract_peaks(
                cube.histogram(pix % cam.n_x, pix / cam.n_x),
                cfg.min_amplitude,
                cfg.min_separation_bins,
            );
            let mut c = Vec::with_capacity(peaks.len() * spots.len());
            for p in &peaks {
                for s in 0..spots.len() {
                    if let Some(iv) = candidate_interval(rig, spots, s, pix, &cc, p.bin) {
                        if admissible(&iv.2, cfg) {
                            c.push(iv);
                        }
                    }
                }
            }
            interval_vote(&c)
        })
        .collect();
    Ok(to_depth_map(cam.n_x, cam.n_y, est))
}

/// Multiplexed depth by the mode of point candidates discretized at
/// `depth_bin_size`.
pub fn depth_by_mode(
    cube: &TransientCube,
    rig: &LidarRig,
    spots: &SpotSet,
    cfg: &DemuxConfig,
) -> Result<DepthMap> {
    check_sensor(cube, rig)?;
    let cam = &rig.camera;
    let bin = cfg.bin_size(&cube.config());
    if !(bin > 0.0) {
        return Err(Error::InvalidInput(
            "depth bin size must be positive".into(),
        ));
    }
    let est: Vec<Option<f64>> = (0..cam.pixel_count())
        .into_par_iter()
        .map(|pix| mode_depth(&depth_candidates(cube, rig, spots, pix, cfg), bin))
        .collect();
    Ok(to_depth_map(cam.n_x, cam.n_y, est))
}

fn to_depth_map(n_x: usize, n_y: usize, est: Vec<Option<f64>>) -> DepthMap {
    DepthMap {
        n_x,
        n_y,
        valid: est.iter().map(Option::is_some).collect(),
        depth: est.into_iter().map(|e| e.unwrap_or(0.0)).collect(),
    }
}

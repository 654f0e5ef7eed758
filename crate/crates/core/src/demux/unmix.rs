use super::depth::DemuxConfig;
use super::tof::{two_bounce_path, unproject, DepthMap};
use crate::error::{Error, Result};
use crate::geometry::{Dir3, Vec3};
use crate::render::{CubeConfig, LidarRig, ShadowMaskSet, SpotSet, TransientCube, FACING_EPSILON};
use rayon::prelude::*;

/// Largest collision cluster resolved by exhaustive subset search; bigger
/// clusters are reported lit.
pub const MAX_CLUSTER: usize = 16;

/// Surface normals from a depth map, facing the sensor. Each tangent is
/// taken on the side whose next two samples are most nearly collinear, so
/// pixels next to a crease or silhouette use neighbours on their own
/// surface.
pub fn estimate_normals(depth: &DepthMap, rig: &LidarRig) -> Vec<Option<Dir3>> {
    let (nx, ny) = (depth.n_x as i64, depth.n_y as i64);
    let at = |u: i64, v: i64| -> Option<Vec3> {
        if u < 0 || v < 0 || u >= nx || v >= ny {
            return None;
        }
        let q = (v * nx + u) as usize;
        depth.get(q).map(|d| unproject(rig, q, d))
    };
    (0..depth.len())
        .into_par_iter()
        .map(|p| {
            let (u, v) = (p as i64 % nx, p as i64 / nx);
            let x = at(u, v)?;
            let tangent = |du: i64, dv: i64| -> Option<Vec3> {
                let mut best: Option<(f64, Vec3)> = None;
                for sgn in [1i64, -1] {
                    let Some(a) = at(u + sgn * du, v + sgn * dv) else {
                        continue;
                    };
                    let t = (a - x) * sgn as f64;
                    let dev = match at(u + 2 * sgn * du, v + 2 * sgn * dv) {
                        Some(b) => (b - a * 2.0 + x).norm() / t.norm(),
                        None => f64::INFINITY,
                    };
                    if best.is_none_or(|(d, _)| dev < d) {
                        best = Some((dev, t));
                    }
                }
                best.map(|b| b.1)
            };
            let n = tangent(1, 0)?.cross(tangent(0, 1)?);
            let n = if n.dot(rig.camera.position - x) < 0.0 {
                -n
            } else {
                n
            };
            Dir3::new(n)
        })
        .collect()
}

/// Sparse response of one return: the two-bin split of its pathlength
/// convolved with `kernel` (centered on `(len - 1) / 2`).
fn response(cfg: &CubeConfig, path: f64, kernel: &[f64]) -> Option<Vec<(usize, f64)>> {
    let parts = cfg.split(path).ok()??;
    let c = (kernel.len() as i64 - 1) / 2;
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (k, w) in parts {
        if w == 0.0 {
            continue;
        }
        for (j, &kv) in kernel.iter().enumerate() {
            let b = k as i64 + j as i64 - c;
            if b < 0 || b >= cfg.n_t as i64 || kv == 0.0 {
                continue;
            }
            match out.iter_mut().find(|(bb, _)| *bb == b as usize) {
                Some(e) => e.1 += w * kv,
                None => out.push((b as usize, w * kv)),
            }
        }
    }
    out.sort_by_key(|e| e.0);
    (!out.is_empty()).then_some(out)
}

struct Candidate {
    spot: usize,
    resp: Vec<(usize, f64)>,
    /// Predicted two-bounce amplitude up to the pixel's albedo and laser
    /// power; zero when the pair is predicted not to face each other.
    weight: f64,
    own: bool,
}

fn support_mass(h: &[f64], resp: &[(usize, f64)]) -> f64 {
    resp.iter().map(|&(k, _)| h[k]).sum()
}

fn overlaps(a: &[(usize, f64)], b: &[(usize, f64)]) -> bool {
    a.first().unwrap().0 <= b.last().unwrap().0 && b.first().unwrap().0 <= a.last().unwrap().0
}

/// Residual of explaining `h` over `bins` with the lit members of `mask`,
/// scaled by `rho`. Own-pixel one-bounce returns get a free non-negative
/// amplitude.
fn subset_residual(h: &[f64], bins: (usize, usize), cl: &[&Candidate], mask: u32, rho: f64) -> f64 {
    let (lo, hi) = bins;
    let mut r: Vec<f64> = h[lo..=hi].to_vec();
    for (i, c) in cl.iter().enumerate() {
        if mask >> i & 1 == 1 && !c.own {
            for &(k, a) in &c.resp {
                r[k - lo] -= rho * c.weight * a;
            }
        }
    }
    for c in cl.iter().filter(|c| c.own) {
        let dot: f64 = c.resp.iter().map(|&(k, a)| r[k - lo] * a).sum();
        let nn: f64 = c.resp.iter().map(|&(_, a)| a * a).sum();
        let alpha = (dot / nn).max(0.0);
        for &(k, a) in &c.resp {
            r[k - lo] -= alpha * a;
        }
    }
    r.iter().map(|v| v * v).sum()
}

fn resolve_pixel(h: &[f64], cands: &[Candidate], min_amplitude: f64, lit: &mut [bool]) {
    // Only returns with measured support are candidates for being lit.
    let live: Vec<&Candidate> = cands
        .iter()
        .filter(|c| support_mass(h, &c.resp) >= min_amplitude)
        .collect();
    let mut order: Vec<&Candidate> = live.clone();
    order.sort_by_key(|c| (c.resp[0].0, c.spot));
    let mut clusters: Vec<Vec<&Candidate>> = Vec::new();
    for c in order {
        if let Some(last) = clusters.last_mut() {
            if last.iter().any(|o| overlaps(&o.resp, &c.resp)) {
                last.push(c);
                continue;
            }
        }
        clusters.push(vec![c]);
    }

    // Pixel albedo scale from returns that have their bins to themselves.
    let mut ratios: Vec<f64> = clusters
        .iter()
        .filter(|cl| cl.len() == 1 && !cl[0].own && cl[0].weight > 0.0)
        .map(|cl| {
            let c = cl[0];
            let total: f64 = c.resp.iter().map(|e| e.1).sum();
            support_mass(h, &c.resp) / total / c.weight
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let rho = ratios.get(ratios.len() / 2).copied();

    for cl in clusters {
        if cl.len() == 1 {
            lit[cl[0].spot] = true;
            continue;
        }
        if cl.len() > MAX_CLUSTER {
            cl.iter().for_each(|c| lit[c.spot] = true);
            continue;
        }
        let lo = cl.iter().map(|c| c.resp[0].0).min().unwrap();
        let hi = cl.iter().map(|c| c.resp.last().unwrap().0).max().unwrap();
        let energy: f64 = h[lo..=hi].iter().map(|v| v * v).sum();
        let tie = 1e-9 * energy.max(f64::MIN_POSITIVE);
        let lit_count = |mask: u32| -> u32 {
            cl.iter()
                .enumerate()
                .filter(|(i, c)| mask >> i & 1 == 1 && (c.weight > 0.0 || c.own))
                .count() as u32
        };
        let mut best: Option<(f64, u32)> = None;
        for mask in 0u32..(1u32 << cl.len()) {
            // Members predicted not to face the pixel stay dark unless they
            // are the pixel's own spot.
            if cl
                .iter()
                .enumerate()
                .any(|(i, c)| mask >> i & 1 == 1 && c.weight <= 0.0 && !c.own)
            {
                continue;
            }
            let rho = match rho {
                Some(r) => r,
                None => fit_scale(h, (lo, hi), &cl, mask),
            };
            let res = subset_residual(h, (lo, hi), &cl, mask, rho);
            let better = match best {
                None => true,
                Some((br, bm)) => {
                    res < br - tie || (res <= br + tie && lit_count(mask) > lit_count(bm))
                }
            };
            if better {
                best = Some((res, mask));
            }
        }
        let mask = best.map_or(0, |b| b.1);
        for (i, c) in cl.iter().enumerate() {
            lit[c.spot] = mask >> i & 1 == 1 || c.own;
        }
    }
}

/// Least-squares albedo scale for a subset when no isolated return fixes it.
fn fit_scale(h: &[f64], (lo, hi): (usize, usize), cl: &[&Candidate], mask: u32) -> f64 {
    let mut pred = vec![0.0; hi - lo + 1];
    for (i, c) in cl.iter().enumerate() {
        if mask >> i & 1 == 1 && !c.own {
            for &(k, a) in &c.resp {
                pred[k - lo] += c.weight * a;
            }
        }
    }
    let pp: f64 = pred.iter().map(|v| v * v).sum();
    if pp == 0.0 {
        return 0.0;
    }
    (pred
        .iter()
        .zip(&h[lo..=hi])
        .map(|(p, h)| p * h)
        .sum::<f64>()
        / pp)
        .max(0.0)
}

/// Shadow masks by unmixing colliding returns.
///
/// Where a spot's bins are shared with other spots, the window test of
/// [`super::demux_shadows`] cannot tell whose light arrived. Here every
/// return is modeled as its binned arrival shape scaled by a predicted
/// Lambertian two-bounce amplitude (geometry from the depth map, normals
/// from [`estimate_normals`], spot albedo and normal from `spots`) times
/// one unknown per-pixel factor. Returns alone in their bins are lit iff
/// they carry mass; colliding groups take the lit subset that best explains
/// the measurement, preferring more lit spots on ties. `kernel` is the
/// system's temporal response (`[1.0]` for a noiseless cube).
pub fn unmix_shadows(
    measured: &TransientCube,
    depth: &DepthMap,
    rig: &LidarRig,
    spots: &SpotSet,
    kernel: &[f64],
    cfg: &DemuxConfig,
) -> Result<ShadowMaskSet> {
    let cam = &rig.camera;
    if measured.n_x != cam.n_x
        || measured.n_y != cam.n_y
        || !depth.same_shape(&DepthMap::invalid(cam.n_x, cam.n_y))
    {
        return Err(Error::GeometryMismatch(
            "cube, depth and sensor resolutions differ".into(),
        ));
    }
    if kernel.is_empty() || kernel.iter().any(|k| !(*k >= 0.0)) {
        return Err(Error::InvalidInput(
            "temporal kernel must be non-empty and non-negative".into(),
        ));
    }
    let cube_cfg = measured.config();
    let normals = estimate_normals(depth, rig);
    let x_c = cam.position;
    let m = spots.len();

    let per_pixel: Vec<Vec<bool>> = (0..cam.pixel_count())
        .into_par_iter()
        .map(|pix| {
            let mut lit = vec![false; m];
            let Some(d) = depth.get(pix) else {
                return vec![true; m];
            };
            let (u, v) = (pix % cam.n_x, pix / cam.n_x);
            let h: Vec<f64> = measured.histogram(u, v).iter().map(|&x| x as f64).collect();
            let x = unproject(rig, pix, d);
            let mut cands = Vec::with_capacity(m);
            for s in 0..m {
                let src = &spots[s].source;
                let Some(resp) =
                    response(&cube_cfg, two_bounce_path(rig, spots, s, pix, d), kernel)
                else {
                    lit[s] = true;
                    continue;
                };
                let own = cam.project(src.point) == Some((u, v));
                lit[s] |= own;
                let weight = match normals[pix] {
                    Some(n) if !own => {
                        predicted_weight(src.point, src.normal, src.albedo, x, n, x_c)
                    }
                    _ => 0.0,
                };
                cands.push(Candidate {
                    spot: s,
                    resp,
                    weight,
                    own,
                });
            }
            resolve_pixel(&h, &cands, cfg.min_amplitude, &mut lit);
            lit
        })
        .collect();

    let masks = (0..m)
        .map(|s| per_pixel.iter().map(|l| l[s]).collect())
        .collect();
    Ok(ShadowMaskSet {
        n_x: cam.n_x,
        n_y: cam.n_y,
        masks,
    })
}

fn predicted_weight(p: Vec3, n_s: Dir3, albedo: f64, x: Vec3, n: Dir3, x_c: Vec3) -> f64 {
    let d = x - p;
    let r2 = d.norm_squared();
    if !(r2 > 0.0) {
        return 0.0;
    }
    let w = d / r2.sqrt();
    let (cos_out, cos_in) = (n_s.dot(w), -n.dot(w));
    if cos_out <= FACING_EPSILON || cos_in <= FACING_EPSILON {
        return 0.0;
    }
    let to_cam = x_c - x;
    albedo * cos_out * cos_in * n.dot(to_cam / to_cam.norm()).max(0.0) / r2
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
    fn response_of_noiseless_return_is_the_split() {
        let c = cfg();
        let path = c.bin_path() * 10.8;
        let r = response(&c, path, &[1.0]).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!((r[0].0, r[1].0), (10, 11));
        assert!((r[0].1 - 0.7).abs() < 1e-9 && (r[1].1 - 0.3).abs() < 1e-9);
    }

    #[test]
    fn response_spreads_with_kernel() {
        let c = cfg();
        let r = response(&c, c.bin_path() * 10.5, &[0.25, 0.5, 0.25]).unwrap();
        assert_eq!(r.iter().map(|e| e.0).collect::<Vec<_>>(), vec![9, 10, 11]);
        assert!((r.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    fn cand(spot: usize, bins: &[(usize, f64)], weight: f64) -> Candidate {
        Candidate {
            spot,
            resp: bins.to_vec(),
            weight,
            own: false,
        }
    }

    #[test]
    fn collision_resolved_by_amplitude() {
        // Two isolated returns fix the pixel scale at 2; a shadowed spot
        // shares bins with a lit one.
        let mut h = vec![0.0; 32];
        h[2] = 2.0 * 1.0;
        h[20] = 2.0 * 3.0;
        h[10] = 2.0 * 0.5 * 0.6;
        h[11] = 2.0 * 0.5 * 0.4;
        let cands = [
            cand(0, &[(2, 1.0)], 1.0),
            cand(1, &[(20, 1.0)], 3.0),
            cand(2, &[(10, 0.6), (11, 0.4)], 0.5),
            cand(3, &[(10, 0.3), (11, 0.7)], 0.8),
        ];
        let mut lit = vec![false; 4];
        resolve_pixel(&h, &cands, 1e-6, &mut lit);
        assert_eq!(lit, vec![true, true, true, false]);
    }

    #[test]
    fn non_facing_member_stays_dark() {
        let mut h = vec![0.0; 32];
        h[5] = 1.0;
        let cands = [
            cand(0, &[(5, 1.0)], 1.0),
            cand(1, &[(5, 0.5), (6, 0.5)], 0.0),
        ];
        let mut lit = vec![false; 2];
        resolve_pixel(&h, &cands, 1e-6, &mut lit);
        assert_eq!(lit, vec![true, false]);
    }

    #[test]
    fn ambiguous_collision_prefers_lit() {
        let mut h = vec![0.0; 32];
        h[5] = 1.0;
        let cands = [cand(0, &[(5, 1.0)], 1.0), cand(1, &[(5, 1.0)], 1.0)];
        let mut lit = vec![false; 2];
        resolve_pixel(&h, &cands, 1e-6, &mut lit);
        // With no isolated return the scale is free, so either spot alone or
        // both explain the bin equally well.
        assert_eq!(lit, vec![true, true]);
    }
}

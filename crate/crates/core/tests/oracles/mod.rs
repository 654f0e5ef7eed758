//! Independent reference implementations shared by the oracle tests.
#![allow(dead_code)]

use bounce_core::demux::{rescale_with_anchors, DepthMap};
use bounce_core::geometry::{
    ellipsoid_depth, Dir3, Material, Primitive, Ray, Room, Scene, Shape, SurfaceId, Vec3, Wall,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rand_vec(rng: &mut ChaCha8Rng, lo: Vec3, hi: Vec3) -> Vec3 {
    Vec3::new(
        rng.random_range(lo.x..hi.x),
        rng.random_range(lo.y..hi.y),
        rng.random_range(lo.z..hi.z),
    )
}

pub fn rand_dir(rng: &mut ChaCha8Rng) -> Dir3 {
    loop {
        let v = rand_vec(rng, Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0));
        if v.norm() > 0.1 && v.norm() < 1.0 {
            return Dir3::new(v).unwrap();
        }
    }
}

// Independent first-hit distances, written from the textbook formulas.

fn box_hit(min: Vec3, max: Vec3, o: Vec3, d: Vec3) -> Option<f64> {
    let mut best: Option<f64> = None;
    for k in 0..3 {
        if d.axis(k) == 0.0 {
            continue;
        }
        for plane in [min.axis(k), max.axis(k)] {
            let t = (plane - o.axis(k)) / d.axis(k);
            if t < 0.0 {
                continue;
            }
            let p = o + d * t;
            let inside = (0..3)
                .filter(|&j| j != k)
                .all(|j| p.axis(j) >= min.axis(j) - 1e-12 && p.axis(j) <= max.axis(j) + 1e-12);
            if inside && best.is_none_or(|b| t < b) {
                best = Some(t);
            }
        }
    }
    best
}

fn sphere_hit(c: Vec3, r: f64, o: Vec3, d: Vec3) -> Option<f64> {
    let oc = o - c;
    let b = oc.dot(d);
    let disc = b * b - (oc.dot(oc) - r * r);
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    [-b - s, -b + s].into_iter().find(|&t| t >= 0.0)
}

fn cylinder_hit(base: Vec3, axis: Vec3, r: f64, h: f64, o: Vec3, d: Vec3) -> Option<f64> {
    let mut cands = Vec::new();
    let w = o - base;
    let dp = d - axis * d.dot(axis);
    let wp = w - axis * w.dot(axis);
    let a = dp.dot(dp);
    if a > 1e-15 {
        let b = 2.0 * dp.dot(wp);
        let c = wp.dot(wp) - r * r;
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            for t in [
                (-b - disc.sqrt()) / (2.0 * a),
                (-b + disc.sqrt()) / (2.0 * a),
            ] {
                let s = (w + d * t).dot(axis);
                if t >= 0.0 && (0.0..=h).contains(&s) {
                    cands.push(t);
                }
            }
        }
    }
    let da = d.dot(axis);
    if da != 0.0 {
        for cap in [0.0, h] {
            let t = (cap - w.dot(axis)) / da;
            let p = w + d * t;
            let radial = p - axis * p.dot(axis);
            if t >= 0.0 && radial.norm() <= r {
                cands.push(t);
            }
        }
    }
    cands.into_iter().reduce(f64::min)
}

fn wall_hit(room: &Room, o: Vec3, d: Vec3) -> (f64, Wall) {
    let mut best = (f64::INFINITY, Wall::NegX);
    for (k, (neg, pos)) in [
        (Wall::NegX, Wall::PosX),
        (Wall::NegY, Wall::PosY),
        (Wall::NegZ, Wall::PosZ),
    ]
    .into_iter()
    .enumerate()
    {
        let (plane, wall) = if d.axis(k) > 0.0 {
            (room.max.axis(k), pos)
        } else if d.axis(k) < 0.0 {
            (room.min.axis(k), neg)
        } else {
            continue;
        };
        let t = (plane - o.axis(k)) / d.axis(k);
        if t < best.0 {
            best = (t, wall);
        }
    }
    best
}

pub fn first_hit(scene: &Scene, o: Vec3, d: Vec3) -> (f64, SurfaceId) {
    let mut best: Option<(f64, usize)> = None;
    for (i, obj) in scene.objects.iter().enumerate() {
        let t = match obj.shape {
            Shape::Box { min, max } => box_hit(min, max, o, d),
            Shape::Sphere { center, radius } => sphere_hit(center, radius, o, d),
            Shape::Cylinder {
                base,
                axis,
                radius,
                height,
            } => cylinder_hit(base, axis.get(), radius, height, o, d),
            Shape::Panel { .. } => unreachable!("no panels in these scenes"),
        };
        if let Some(t) = t {
            if best.is_none_or(|(b, _)| t < b) {
                best = Some((t, i));
            }
        }
    }
    let (wt, w) = wall_hit(&scene.room, o, d);
    match best {
        Some((t, i)) if t <= wt => (t, SurfaceId::Object(i)),
        _ => (wt, SurfaceId::Wall(w)),
    }
}

pub fn random_scene(rng: &mut ChaCha8Rng) -> Scene {
    let room = Room::new(
        Vec3::new(-2.0, 0.0, 0.0),
        Vec3::new(2.0, 3.0, 5.0),
        [0.5; 6],
    );
    let n = rng.random_range(1..=5);
    let lo = Vec3::new(-1.5, 0.5, 0.5);
    let hi = Vec3::new(1.5, 2.5, 4.5);
    let objects = (0..n)
        .map(|_| {
            let c = rand_vec(rng, lo, hi);
            let s = rng.random_range(0.1..0.45);
            let shape = match rng.random_range(0..3) {
                0 => {
                    let e = rand_vec(rng, Vec3::new(0.05, 0.05, 0.05), Vec3::new(s, s, s));
                    Shape::Box {
                        min: c - e,
                        max: c + e,
                    }
                }
                1 => Shape::Sphere {
                    center: c,
                    radius: s,
                },
                _ => {
                    let axis = rand_dir(rng);
                    Shape::Cylinder {
                        base: c - axis.get() * s,
                        axis,
                        radius: 0.5 * s,
                        height: 2.0 * s,
                    }
                }
            };
            Primitive::new(shape, Material::Diffuse { albedo: 0.5 })
        })
        .collect();
    Scene::new(room, objects).unwrap()
}

/// Scans `t` on a 1e-4 m grid for the point whose focal distance sum is
/// closest to `path`.
fn brute_force_depth(path: f64, focus: Vec3, origin: Vec3, dir: Vec3, t_max: f64) -> f64 {
    let steps = (t_max / 1e-4) as usize;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=steps {
        let t = k as f64 * 1e-4;
        let err = (t + (origin + dir * t - focus).norm() - path).abs();
        if err < best.0 {
            best = (err, t);
        }
    }
    best.1
}

/// Compares `intersect_ray` with [`first_hit`] on `rays` random rays.
/// Returns the largest relative distance error and the number of rays that
/// hit a different surface.
pub fn intersect_agreement(seed: u64, rays: usize) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut wrong, mut checked) = (0.0f64, 0, 0);
    while checked < rays {
        let scene = random_scene(&mut rng);
        for _ in 0..100 {
            let o = rand_vec(
                &mut rng,
                Vec3::new(-1.9, 0.1, 0.1),
                Vec3::new(1.9, 2.9, 4.9),
            );
            if scene.objects.iter().any(|p| p.shape.contains(o)) {
                continue;
            }
            let d = rand_dir(&mut rng);
            let hit = scene
                .intersect_ray(&Ray::new(o, d))
                .expect("closed room always hit");
            let (t, id) = first_hit(&scene, o, d.get());
            worst = worst.max((hit.distance - t).abs() / t.max(1.0));
            wrong += usize::from(hit.surface != id);
            checked += 1;
        }
    }
    (worst, wrong)
}

/// Largest gap between `ellipsoid_depth` and [`brute_force_depth`] over
/// `configs` random ray/focus configurations.
pub fn ellipsoid_agreement(seed: u64, configs: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < configs {
        let origin = rand_vec(
            &mut rng,
            Vec3::new(-0.5, -0.5, -0.5),
            Vec3::new(0.5, 0.5, 0.5),
        );
        let focus = rand_vec(
            &mut rng,
            Vec3::new(-3.0, -3.0, 0.5),
            Vec3::new(3.0, 3.0, 6.0),
        );
        let dir = rand_dir(&mut rng);
        let t_true = rng.random_range(0.3..6.0);
        let path = t_true + (origin + dir.get() * t_true - focus).norm();
        // Rays nearly through the focus are ill-conditioned for any method.
        if (path - dir.get().dot(focus - origin)).abs() < 1e-3 {
            continue;
        }
        let t = ellipsoid_depth(path, focus, origin, dir).unwrap();
        let bf = brute_force_depth(path, focus, origin, dir.get(), 8.0);
        worst = worst.max((t - bf).abs());
        done += 1;
    }
    worst
}

/// Largest gap between `rescale_with_anchors` and the normal-equation
/// solution over `trials` random anchor sets.
pub fn anchor_agreement(seed: u64, trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = 64;
        let rel: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
        let valid: Vec<bool> = (0..n).map(|_| rng.random_bool(0.9)).collect();
        let map = DepthMap::new(8, 8, rel.clone(), valid.clone()).unwrap();
        let (a_true, b_true) = (rng.random_range(0.2..4.0), rng.random_range(-1.0..1.0));
        let anchors: Vec<(usize, f64)> = (0..n)
            .filter(|&p| valid[p])
            .take(rng.random_range(2..20))
            .map(|p| (p, a_true * rel[p] + b_true + rng.random_range(-0.05..0.05)))
            .collect();
        if anchors.len() < 2 {
            continue;
        }
        // Normal equations [sxx sx; sx n] [a b]^T = [sxy sy]^T by Cramer's rule.
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(p, m) in &anchors {
            sx += rel[p];
            sy += m;
            sxx += rel[p] * rel[p];
            sxy += rel[p] * m;
        }
        let k = anchors.len() as f64;
        let det = sxx * k - sx * sx;
        let a = (sxy * k - sx * sy) / det;
        let b = (sxx * sy - sx * sxy) / det;
        let out = rescale_with_anchors(&map, &anchors).unwrap();
        for p in 0..n {
            assert_eq!(out.valid[p], valid[p]);
            if valid[p] {
                worst = worst.max((out.depth[p] - (a * rel[p] + b)).abs());
            }
        }
    }
    worst
}

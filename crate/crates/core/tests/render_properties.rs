mod common;

use bounce_core::demux::{two_bounce_path, DepthMap};
use bounce_core::geometry::{
    Dir3, Mat3, Material, Point3, Primitive, Ray, Room, Scene, Shape, SurfaceId, Vec3, Wall,
};
use bounce_core::io::{MirrorSpec, SceneSpec};
use bounce_core::render::{
    trace_spots, Camera, CubeConfig, Families, LidarRig, PathFamily, RenderConfig, Renderer,
    TransientCube, FACING_EPSILON,
};
use std::f64::consts::PI;

const ONE_BOUNCE_ONLY: Families = Families {
    one_bounce: true,
    two_bounce: false,
    via_mirror: false,
};

fn spot_on_axis(room: Room, objects: Vec<Primitive>, n: usize) -> (Scene, LidarRig) {
    let scene = Scene::new(room, objects).unwrap();
    let cam = Camera::new(Vec3::ZERO, Mat3::IDENTITY, 90.0, n, n);
    let rig = LidarRig::new(cam, Vec3::ZERO, (1, 1), vec![Dir3::Z]).unwrap();
    (scene, rig)
}

fn argmax(h: &[f32]) -> usize {
    (0..h.len()).max_by(|&a, &b| h[a].total_cmp(&h[b])).unwrap()
}

/// Mean continuous bin coordinate of a histogram, bin `k` centered at `k + 0.5`.
fn mean_position(h: &[f32]) -> f64 {
    let m: f64 = h.iter().map(|&v| v as f64).sum();
    h.iter()
        .enumerate()
        .map(|(k, &v)| (k as f64 + 0.5) * v as f64)
        .sum::<f64>()
        / m
}

#[test]
fn collocated_one_bounce_off_wall_two_meters_ahead() {
    let room = Room::new(
        Vec3::new(-2.0, -2.0, -1.0),
        Vec3::new(2.0, 2.0, 2.0),
        [0.5; 6],
    );
    let (scene, rig) = spot_on_axis(room, vec![], 63);
    let cfg = RenderConfig {
        families: ONE_BOUNCE_ONLY,
        ..RenderConfig::default()
    };
    let cube = Renderer::new(&scene, &rig).unwrap().render(&cfg).unwrap();

    // 4.0 m round trip, bins of c * 128 ps from 1 m.
    let bin = ((4.0f64 - 1.0) / (299_792_458.0 * 128e-12)).floor() as usize;
    assert_eq!(bin, 78);
    let h = cube.histogram(31, 31);
    assert_eq!(argmax(h), bin);
    let expected = cfg.laser_power * 0.5 / (PI * 4.0);
    let total: f64 = h.iter().map(|&v| v as f64).sum();
    assert!(
        (total - expected).abs() / expected < 1e-6,
        "{total} vs {expected}"
    );
    assert!(
        (cube.total() - total).abs() < 1e-3,
        "only the spot's own pixel sees one-bounce light"
    );
}

#[test]
fn two_bounce_hand_example_lands_in_bin_142() {
    // Spot at (1, 0, 2), imaged point at (-1, 0, 2), laser and sensor at the
    // origin: sqrt(5) + 2 + sqrt(5) meters.
    let room = Room::new(
        Vec3::new(-3.0, -3.0, -1.0),
        Vec3::new(3.0, 3.0, 2.0),
        [0.5; 6],
    );
    let scene = Scene::new(room, vec![]).unwrap();
    let forward = Vec3::new(-1.0, 0.0, 2.0);
    let cam = Camera::new(
        Vec3::ZERO,
        Mat3::look_along(forward, Vec3::Y).unwrap(),
        60.0,
        33,
        33,
    );
    let rig = LidarRig::new(
        cam,
        Vec3::ZERO,
        (1, 1),
        vec![Dir3::new(Vec3::new(1.0, 0.0, 2.0)).unwrap()],
    )
    .unwrap();
    let spots = trace_spots(&scene, &rig).unwrap();
    assert!((spots.spots[0].x_i - Vec3::new(1.0, 0.0, 2.0)).norm() < 1e-12);

    let pix = cam.pixel_index(16, 16);
    let path = two_bounce_path(&rig, &spots, 0, pix, 5f64.sqrt());
    let hand = 2.0 * 5f64.sqrt() + 2.0;
    assert!((path - hand).abs() < 1e-9);
    assert_eq!(CubeConfig::default().bin_of(path), Some(142));
}

#[test]
fn two_bounce_deposits_follow_geometric_path_and_bin_mean() {
    let cfg = CubeConfig::default();
    for spec in common::scenes(10, 3, false) {
        let spec = spec.with_resolution(24, 24).with_spot_grid(3, 3);
        let (scene, rig) = spec.build().unwrap();
        let r = Renderer::new(&scene, &rig).unwrap();
        let cam = rig.camera;
        let rc = RenderConfig {
            families: Families::TWO_BOUNCE_ONLY,
            ..RenderConfig::default()
        };
        let mut buf = Vec::new();
        let mut checked = 0;
        for (s, &dir) in rig.spot_dirs.iter().enumerate() {
            let x_i = scene
                .intersect_ray(&Ray::new(rig.laser, dir))
                .unwrap()
                .point;
            let cube = r.render_spots(&[s], &rc).unwrap();
            for pix in 0..cam.pixel_count() {
                let (u, v) = (pix % cam.n_x, pix / cam.n_x);
                let x = scene.intersect_ray(&cam.pixel_ray(u, v)).unwrap().point;
                let path = (x_i - rig.laser).norm() + (x - x_i).norm() + (cam.position - x).norm();
                buf.clear();
                r.deposits(pix, s, 1.0, &mut buf);
                let two: Vec<_> = buf
                    .iter()
                    .filter(|d| d.family == PathFamily::TwoBounce)
                    .collect();
                if two.is_empty() {
                    continue;
                }
                assert_eq!(two.len(), 1);
                assert!(
                    (two[0].path - path).abs() < 1e-9,
                    "deposit {} vs oracle {path}",
                    two[0].path
                );
                let h = cube.histogram(u, v);
                let pos = cfg.position(path);
                if pos > 0.5 && pos < cfg.n_t as f64 - 0.5 {
                    // The linear split preserves the mean, well inside one bin.
                    assert!((mean_position(h) - pos).abs() < 1e-3);
                    checked += 1;
                }
            }
        }
        assert!(
            checked > 100,
            "only {checked} pixels carried two-bounce light"
        );
    }
}

#[test]
fn multiplexed_render_is_the_ordered_sum_of_single_spot_renders() {
    for spec in common::scenes(40, 3, true) {
        let spec = spec.with_resolution(20, 20).with_spot_grid(3, 3);
        let (scene, rig) = spec.build().unwrap();
        let cfg = RenderConfig::default();
        let multiplexed = Renderer::new(&scene, &rig).unwrap().render(&cfg).unwrap();
        let mut sum = TransientCube::zeros(20, 20, &cfg.cube);
        for s in 0..rig.spot_count() {
            let single = rig.single_spot(s);
            sum.accumulate(
                &Renderer::new(&scene, &single)
                    .unwrap()
                    .render(&cfg)
                    .unwrap(),
            )
            .unwrap();
        }
        assert_eq!(multiplexed, sum);
    }
}

#[test]
fn render_is_identical_across_thread_counts() {
    let spec = common::scenes(5, 1, true).remove(0).with_resolution(24, 24);
    let (scene, rig) = spec.build().unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let r = Renderer::new(&scene, &rig).unwrap();
            (
                r.render(&RenderConfig::default()).unwrap(),
                r.gbuffer(),
                r.shadow_masks(),
            )
        })
    };
    assert_eq!(run(1), run(3));
}

fn scale_spec(spec: &SceneSpec, k: f64) -> SceneSpec {
    let mut out = spec.clone();
    out.room.min = out.room.min * k;
    out.room.max = out.room.max * k;
    for o in &mut out.objects {
        o.shape = match o.shape {
            Shape::Box { min, max } => Shape::Box {
                min: min * k,
                max: max * k,
            },
            Shape::Cylinder {
                base,
                axis,
                radius,
                height,
            } => Shape::Cylinder {
                base: base * k,
                axis,
                radius: radius * k,
                height: height * k,
            },
            Shape::Sphere { center, radius } => Shape::Sphere {
                center: center * k,
                radius: radius * k,
            },
            Shape::Panel {
                center,
                normal,
                u_axis,
                half_u,
                half_v,
            } => Shape::Panel {
                center: center * k,
                normal,
                u_axis,
                half_u: half_u * k,
                half_v: half_v * k,
            },
        };
    }
    out.mirrors = spec
        .mirrors
        .iter()
        .map(|m| MirrorSpec {
            wall: m.wall,
            center: m.center.map(|c| c * k),
            half_extents: m.half_extents.map(|h| h * k),
        })
        .collect();
    out.rig.camera.position = out.rig.camera.position * k;
    out.rig.laser = out.rig.laser * k;
    out
}

#[test]
fn doubling_the_scene_quarters_two_bounce_weights() {
    for spec in common::scenes(60, 3, true) {
        let spec = spec.with_resolution(16, 16).with_spot_grid(2, 2);
        let big = scale_spec(&spec, 2.0);
        let (scene, rig) = spec.build().unwrap();
        let (scene2, rig2) = big.build().unwrap();
        for (a, b) in rig.spot_dirs.iter().zip(&rig2.spot_dirs) {
            assert!((a.get() - b.get()).norm() < 1e-9);
        }
        let r = Renderer::new(&scene, &rig).unwrap();
        let r2 = Renderer::new(&scene2, &rig2).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let mut compared = 0;
        for pix in 0..rig.camera.pixel_count() {
            for s in 0..rig.spot_count() {
                a.clear();
                b.clear();
                r.deposits(pix, s, 1.0, &mut a);
                r2.deposits(pix, s, 1.0, &mut b);
                assert_eq!(a.len(), b.len(), "pixel {pix} spot {s}");
                for (d, d2) in a.iter().zip(&b) {
                    assert_eq!(d.family, d2.family);
                    assert!((d2.path - 2.0 * d.path).abs() < 1e-8);
                    if d.family == PathFamily::TwoBounce {
                        assert!((d2.weight / d.weight - 0.25).abs() < 1e-9);
                        compared += 1;
                    }
                }
            }
        }
        assert!(compared > 0);
    }
}

#[test]
fn mirror_at_45_degrees_relocates_the_spot() {
    let room = Room::new(
        Vec3::new(-2.0, 0.0, 0.0),
        Vec3::new(2.0, 3.0, 5.0),
        [0.6; 6],
    );
    let mirror = Primitive::new(
        Shape::Panel {
            center: Vec3::new(-2.0, 1.5, 2.5),
            normal: Dir3::X,
            u_axis: Dir3::Y,
            half_u: 1.0,
            half_v: 1.5,
        },
        Material::Mirror,
    );
    let scene = Scene::new(room, vec![mirror]).unwrap();
    let cam = Camera::new(Vec3::new(0.0, 1.5, 0.5), Mat3::IDENTITY, 90.0, 16, 16);
    let dir = Dir3::new(Vec3::new(-1.0, 0.0, 1.0)).unwrap();
    let rig = LidarRig::new(cam, Vec3::new(0.0, 1.5, 0.5), (1, 1), vec![dir]).unwrap();
    let spot = trace_spots(&scene, &rig).unwrap().spots[0];
    assert!(spot.is_mirror);
    assert!((spot.x_i - Vec3::new(-2.0, 1.5, 2.5)).norm() < 1e-9);
    assert!((spot.virtual_x_i.unwrap() - Vec3::new(0.5, 1.5, 5.0)).norm() < 1e-9);
    assert!((spot.laser_leg - 4.5 * 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(spot.source.normal, Dir3::NEG_Z);
}

#[test]
fn gbuffer_reports_mirror_range_and_unit_normals() {
    let room = Room::new(
        Vec3::new(-2.0, -2.0, -1.0),
        Vec3::new(2.0, 2.0, 2.0),
        [0.5; 6],
    );
    let mirror = MirrorSpec {
        wall: Wall::PosZ,
        center: [0.0, 0.0],
        half_extents: [0.5, 0.5],
    }
    .primitive(&room);
    let (plain, rig) = spot_on_axis(room, vec![], 63);
    let (mirrored, _) = spot_on_axis(room, vec![mirror], 63);
    let center = rig.camera.pixel_index(31, 31);

    let g = Renderer::new(&plain, &rig).unwrap().gbuffer();
    assert!((g.depth[center] - 2.0).abs() < 1e-12);
    assert!(!g.specular[center]);
    let gm = Renderer::new(&mirrored, &rig).unwrap().gbuffer();
    assert!((gm.depth[center] - 2.0).abs() < 1e-12);
    assert!(gm.specular[center]);

    for spec in common::scenes(0, 2, true) {
        let (scene, rig) = spec.with_resolution(256, 256).build().unwrap();
        let g = Renderer::new(&scene, &rig).unwrap().gbuffer();
        assert!(g
            .normals
            .iter()
            .all(|n| (n.get().norm() - 1.0).abs() < 1e-9));
        assert!(g.depth.iter().all(|d| d.is_finite() && *d > 0.0));
    }
}

#[test]
fn empty_room_masks_follow_facing_alone() {
    let spec = common::scenes(3, 1, false)
        .remove(0)
        .with_resolution(32, 32);
    let mut spec = spec;
    spec.objects.clear();
    let (scene, rig) = spec.build().unwrap();
    let r = Renderer::new(&scene, &rig).unwrap();
    let masks = r.shadow_masks();
    let cam = rig.camera;
    for (s, mask) in masks.masks.iter().enumerate() {
        let src = r.spots().spots[s].source;
        for pix in 0..cam.pixel_count() {
            let hit = scene
                .intersect_ray(&cam.pixel_ray(pix % cam.n_x, pix / cam.n_x))
                .unwrap();
            let w = hit.point - src.point;
            let facing = w.norm() < 1e-9
                || (src.normal.dot(w) / w.norm() > FACING_EPSILON
                    && -hit.normal.dot(w) / w.norm() > FACING_EPSILON);
            let on_spot_plane = hit.normal.dot(src.normal.get()) > 1.0 - 1e-9
                && w.dot(src.normal.get()).abs() < 1e-6;
            let own = r.own_pixel(s) == Some(pix) && on_spot_plane;
            assert_eq!(mask[pix], facing || own, "spot {s} pixel {pix}");
        }
    }
}

/// Convex hull of 2-D points, counter-clockwise.
fn hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn inside(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    (0..poly.len()).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0
    })
}

#[test]
fn box_shadow_on_back_wall_matches_projected_hull() {
    let room = Room::new(
        Vec3::new(-2.0, 0.0, 0.0),
        Vec3::new(2.0, 3.0, 5.0),
        [0.6; 6],
    );
    let (lo, hi) = (Vec3::new(-0.5, 1.0, 2.5), Vec3::new(0.3, 2.0, 3.2));
    let scene = Scene::new(room, vec![Primitive::diffuse_box(lo, hi, 0.5)]).unwrap();
    let cam_pos = Vec3::new(0.0, 1.5, 0.1);
    let cam = Camera::new(cam_pos, Mat3::IDENTITY, 90.0, 96, 96);
    let x_i = Vec3::new(-2.0, 1.5, 1.0);
    let rig = LidarRig::new(
        cam,
        cam_pos,
        (1, 1),
        vec![Dir3::new(x_i - cam_pos).unwrap()],
    )
    .unwrap();
    let r = Renderer::new(&scene, &rig).unwrap();
    assert!((r.spots().spots[0].x_i - x_i).norm() < 1e-9);
    let mask = &r.shadow_masks().masks[0];

    // Central projection of the box corners from the spot onto z = 5.
    let mut corners = Vec::new();
    for &x in &[lo.x, hi.x] {
        for &y in &[lo.y, hi.y] {
            for &z in &[lo.z, hi.z] {
                let c: Point3 = Vec3::new(x, y, z);
                let t = (5.0 - x_i.z) / (c.z - x_i.z);
                let p = x_i + (c - x_i) * t;
                corners.push((p.x, p.y));
            }
        }
    }
    let shadow = hull(corners);
    let on_back = |u: usize, v: usize| {
        let h = scene.intersect_ray(&cam.pixel_ray(u, v)).unwrap();
        (h.surface == SurfaceId::Wall(Wall::PosZ)).then_some((h.point.x, h.point.y))
    };
    let oracle = |u: usize, v: usize| on_back(u, v).map(|p| !inside(&shadow, p));

    let (mut agree, mut shadowed) = (0, 0);
    for v in 1..cam.n_y - 1 {
        for u in 1..cam.n_x - 1 {
            let Some(lit) = oracle(u, v) else { continue };
            // Pixels within one pixel of the shadow boundary are excluded.
            let band =
                (0..9).any(|k| oracle(u + k % 3 - 1, v + k / 3 - 1).is_some_and(|l| l != lit));
            if band {
                continue;
            }
            assert_eq!(mask[cam.pixel_index(u, v)], lit, "pixel ({u}, {v})");
            agree += 1;
            shadowed += usize::from(!lit);
        }
    }
    assert!(
        agree > 500 && shadowed > 50,
        "{agree} pixels compared, {shadowed} shadowed"
    );
}

#[test]
fn spot_subsets_render_like_reduced_rigs() {
    let spec = common::scenes(2, 1, true)
        .remove(0)
        .with_resolution(16, 16)
        .with_spot_grid(3, 3);
    let (scene, rig) = spec.build().unwrap();
    let cfg = RenderConfig::default();
    let keep = [7, 2, 4];
    let a = Renderer::new(&scene, &rig)
        .unwrap()
        .render_spots(&keep, &cfg)
        .unwrap();
    let sub = rig.subset(&keep);
    let b = Renderer::new(&scene, &sub).unwrap().render(&cfg).unwrap();
    assert_eq!(a, b);
    let depth = DepthMap::from_gbuffer(&Renderer::new(&scene, &rig).unwrap().gbuffer());
    assert_eq!(depth.valid_count(), 256);
}

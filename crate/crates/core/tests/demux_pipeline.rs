mod common;

use bounce_core::demux::{
    collision_pixels, demux_shadows, depth_by_mode, depth_from_multiplexed, depth_from_scanned,
    detect_specular, shadow_transient, two_bounce_tof, unmix_shadows, DemuxConfig, DepthMap,
    SpecularConfig,
};
use bounce_core::metrics::iou;
use bounce_core::render::{render_scanned, CubeConfig, RenderConfig, Renderer, TransientCube};
use proptest::prelude::*;

#[test]
fn scanned_depth_errors_stay_within_one_path_bin() {
    let bin = CubeConfig::default().bin_path();
    for spec in common::scenes(200, 4, false) {
        let spec = spec.with_resolution(32, 32);
        let (scene, rig) = spec.build().unwrap();
        let r = Renderer::new(&scene, &rig).unwrap();
        let gt = r.gbuffer();
        let cubes = render_scanned(&scene, &rig, &RenderConfig::default()).unwrap();
        let depth =
            depth_from_scanned(&cubes, &rig, r.spots(), &DemuxConfig::for_room(&scene.room))
                .unwrap();
        let masks = r.shadow_masks();
        for pix in 0..depth.len() {
            match depth.get(pix) {
                Some(d) => assert!(
                    (d - gt.depth[pix]).abs() <= bin,
                    "pixel {pix}: {d} vs {}",
                    gt.depth[pix]
                ),
                // Only surfaces no spot reaches may go without an estimate.
                None => assert!(
                    masks.masks.iter().all(|m| !m[pix]),
                    "lit pixel {pix} has no depth"
                ),
            }
        }
        assert!(depth.valid_count() * 2 > depth.len());
    }
}

#[test]
fn multiplexed_depth_ignores_spot_order() {
    let spec = common::scenes(210, 1, false)
        .remove(0)
        .with_resolution(32, 32);
    let (scene, rig) = spec.build().unwrap();
    let n = rig.spot_count();
    let perm: Vec<usize> = (0..n).map(|k| (k * 7 + 3) % n).collect();
    let permuted = rig.subset(&perm);
    let cfg = RenderConfig::default();
    let dc = DemuxConfig::for_room(&scene.room);

    let r = Renderer::new(&scene, &rig).unwrap();
    let rp = Renderer::new(&scene, &permuted).unwrap();
    let (a, b) = (r.render(&cfg).unwrap(), rp.render(&cfg).unwrap());
    let close = a
        .data
        .iter()
        .zip(&b.data)
        .all(|(x, y)| (x - y).abs() <= 1e-5 * x.abs().max(1.0));
    assert!(close, "multiplexed sums differ beyond rounding");

    for method in [depth_from_multiplexed, depth_by_mode] {
        let da = method(&a, &rig, r.spots(), &dc).unwrap();
        let db = method(&b, &permuted, rp.spots(), &dc).unwrap();
        let same = (0..da.len()).filter(|&p| da.get(p) == db.get(p)).count();
        assert!(
            same as f64 >= 0.999 * da.len() as f64,
            "{same} of {} pixels agree",
            da.len()
        );
    }

    let depth = DepthMap::from_gbuffer(&r.gbuffer());
    let ua = unmix_shadows(&a, &depth, &rig, r.spots(), &[1.0], &dc).unwrap();
    let ub = unmix_shadows(&b, &depth, &permuted, rp.spots(), &[1.0], &dc).unwrap();
    for (k, &s) in perm.iter().enumerate() {
        assert_eq!(ub.masks[k], ua.masks[s], "spot {s}");
    }
}

#[test]
fn window_demux_is_exact_away_from_collisions() {
    for spec in common::scenes(220, 4, false) {
        let spec = spec.with_resolution(32, 32);
        let (scene, rig) = spec.build().unwrap();
        let r = Renderer::new(&scene, &rig).unwrap();
        let cube = r.render(&RenderConfig::default()).unwrap();
        let depth = DepthMap::from_gbuffer(&r.gbuffer());
        let tof = two_bounce_tof(&depth, &rig, r.spots()).unwrap();
        let dc = DemuxConfig::for_room(&scene.room);
        let demuxed = demux_shadows(&cube, &tof, &dc).unwrap();
        let gt = r.shadow_masks();
        let cc = cube.config();
        let collide = collision_pixels(&tof, &cc, dc.tolerance_bins);
        let mut compared = 0;
        for s in 0..gt.len() {
            // An entry is separated when no other spot's return is within
            // two windows of it.
            let separated = |pix: usize| {
                let pos = cc.position(tof.path(s, pix).unwrap());
                (0..tof.len()).all(|t| {
                    t == s
                        || (cc.position(tof.path(t, pix).unwrap()) - pos).abs()
                            > 2.0 * dc.tolerance_bins
                })
            };
            for pix in (0..depth.len()).filter(|&p| !collide[p] || separated(p)) {
                assert_eq!(
                    demuxed.masks[s][pix], gt.masks[s][pix],
                    "spot {s} pixel {pix}"
                );
                compared += 1;
            }
        }
        assert!(compared > 0);
    }
}

#[test]
fn unmixed_shadows_match_visibility() {
    let mut scores = Vec::new();
    for spec in common::scenes(230, 4, false) {
        let (scene, rig) = spec.with_resolution(32, 32).build().unwrap();
        let r = Renderer::new(&scene, &rig).unwrap();
        let cube = r.render(&RenderConfig::default()).unwrap();
        let depth = DepthMap::from_gbuffer(&r.gbuffer());
        let dc = DemuxConfig::for_room(&scene.room);
        let masks = unmix_shadows(&cube, &depth, &rig, r.spots(), &[1.0], &dc).unwrap();
        let gt = r.shadow_masks();
        scores.extend((0..gt.len()).map(|s| iou(&masks.masks[s], &gt.masks[s])));
    }
    assert!(
        common::mean(&scores) >= 0.98,
        "mean IoU {}",
        common::mean(&scores)
    );
}

#[test]
fn specular_detector_stays_quiet_on_diffuse_scenes() {
    for spec in common::scenes(240, 5, false) {
        let (scene, rig) = spec.with_resolution(32, 32).build().unwrap();
        let r = Renderer::new(&scene, &rig).unwrap();
        let cube = r.render(&RenderConfig::default()).unwrap();
        let depth = DepthMap::from_gbuffer(&r.gbuffer());
        let flags =
            detect_specular(&cube, &depth, &rig, r.spots(), &SpecularConfig::default()).unwrap();
        assert_eq!(flags.iter().filter(|&&f| f).count(), 0);
    }
}

#[test]
fn specular_detector_finds_visible_mirrors() {
    let mut scores = Vec::new();
    for spec in common::scenes(250, 10, true) {
        let (scene, rig) = spec.build().unwrap();
        let r = Renderer::new(&scene, &rig).unwrap();
        let g = r.gbuffer();
        if common::specular_pixels(&g) < 20 {
            continue;
        }
        let cube = r.render(&RenderConfig::default()).unwrap();
        let flags = detect_specular(
            &cube,
            &DepthMap::from_gbuffer(&g),
            &rig,
            r.spots(),
            &SpecularConfig::default(),
        )
        .unwrap();
        assert!(
            flags.iter().zip(&g.specular).all(|(&f, &s)| !f || s),
            "false positive in seed {}",
            spec.seed
        );
        scores.push(iou(&flags, &g.specular));
    }
    assert!(
        scores.len() >= 3,
        "only {} scenes show a mirror",
        scores.len()
    );
    assert!(common::mean(&scores) >= 0.9, "IoUs {scores:?}");
}

#[test]
fn demux_is_identical_across_thread_counts() {
    let spec = common::scenes(260, 1, true)
        .remove(0)
        .with_resolution(32, 32);
    let (scene, rig) = spec.build().unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let r = Renderer::new(&scene, &rig).unwrap();
            let cube = r.render(&RenderConfig::default()).unwrap();
            let dc = DemuxConfig::for_room(&scene.room);
            let depth = depth_from_multiplexed(&cube, &rig, r.spots(), &dc).unwrap();
            let tof = two_bounce_tof(&depth, &rig, r.spots()).unwrap();
            let window = demux_shadows(&cube, &tof, &dc).unwrap();
            let unmixed = unmix_shadows(&cube, &depth, &rig, r.spots(), &[1.0], &dc).unwrap();
            let spec = detect_specular(&cube, &depth, &rig, r.spots(), &SpecularConfig::default())
                .unwrap();
            (depth, tof, window, unmixed, spec)
        })
    };
    assert_eq!(run(1), run(4));
}

fn cube_from(values: Vec<f32>) -> TransientCube {
    let cfg = CubeConfig {
        n_t: 8,
        ..CubeConfig::default()
    };
    let mut c = TransientCube::zeros(2, 2, &cfg);
    c.data = values;
    c
}

proptest! {
    #[test]
    fn shadow_transient_of_a_capture_with_itself_is_zero(v in proptest::collection::vec(0f32..1e3, 32)) {
        let c = cube_from(v);
        let s = shadow_transient(&c, &c).unwrap();
        prop_assert!(s.data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn shadow_transient_is_the_clamped_difference(
        m in proptest::collection::vec(0f32..1e3, 32),
        c in proptest::collection::vec(0f32..1e3, 32),
    ) {
        let s = shadow_transient(&cube_from(m.clone()), &cube_from(c.clone())).unwrap();
        for k in 0..32 {
            prop_assert_eq!(s.data[k], if c[k] > m[k] { c[k] - m[k] } else { 0.0 });
        }
    }
}

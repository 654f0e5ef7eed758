#![allow(dead_code)]

use bounce_core::io::{generate_scene, GeneratorConfig, SceneSpec};
use bounce_core::render::GBuffer;

/// Procedural scenes for seeds `first..first + n`.
pub fn scenes(first: u64, n: u64, mirror: bool) -> Vec<SceneSpec> {
    let cfg = if mirror {
        GeneratorConfig::default()
    } else {
        GeneratorConfig::default().without_mirror()
    };
    (first..first + n)
        .map(|s| generate_scene(s, &cfg).expect("generator"))
        .collect()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn specular_pixels(g: &GBuffer) -> usize {
    g.specular.iter().filter(|&&s| s).count()
}

use crate::common::{ensure_dir, invalid, sibling, spot_cube_suffix, Globals, Noise};
use anyhow::Context;
use bounce_core::demux::{
    demux_shadows, depth_from_multiplexed, depth_from_scanned, detect_specular, two_bounce_tof,
    unmix_shadows, DemuxConfig, SpecularConfig,
};
use bounce_core::io::{read_transient, write_depth, write_mask, write_shadow_masks, write_tof};
use bounce_core::render::{trace_spots, TransientCube};
use clap::ValueEnum;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// One cube per spot (`<stem>.spotNNN.sb3d` next to the input).
    Scanned,
    Multiplexed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShadowMethod {
    /// Fit every return jointly against predicted spot amplitudes.
    Unmix,
    /// Look for mass in each spot's expected time window.
    Window,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Multiplexed cube.
    #[arg(long)]
    pub input: PathBuf,

    /// Scene whose rig and spot geometry were used for the capture.
    #[arg(long)]
    pub scene: PathBuf,

    #[arg(long, value_enum, default_value_t = Mode::Multiplexed)]
    pub mode: Mode,

    #[arg(long, value_enum, default_value_t = ShadowMethod::Unmix)]
    pub shadows: ShadowMethod,

    /// Output directory: depth.sb3d, tof.sb3d, specular.pgm, shadows/.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(g: &Globals, a: Args) -> anyhow::Result<()> {
    let spec = g.load_scene(&a.scene)?;
    let (scene, rig) = spec.build()?;
    let spots = trace_spots(&scene, &rig)?;
    let cube =
        read_transient(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    if cube.n_x != rig.camera.n_x || cube.n_y != rig.camera.n_y {
        return Err(invalid(format!(
            "cube is {}x{} but the rig sensor is {}x{}",
            cube.n_x, cube.n_y, rig.camera.n_x, rig.camera.n_y
        )));
    }
    let cfg = match g.noise {
        Noise::Off => DemuxConfig::for_room(&scene.room),
        Noise::Paper => DemuxConfig::noisy(&scene.room, 0.0),
    };

    let depth = match a.mode {
        Mode::Multiplexed => depth_from_multiplexed(&cube, &rig, &spots, &cfg)?,
        Mode::Scanned => {
            let cubes = (0..spots.len())
                .map(|s| {
                    let p = sibling(&a.input, &spot_cube_suffix(s));
                    read_transient(&p).with_context(|| format!("reading {}", p.display()))
                })
                .collect::<anyhow::Result<Vec<TransientCube>>>()?;
            depth_from_scanned(&cubes, &rig, &spots, &cfg)?
        }
    };
    let tof = two_bounce_tof(&depth, &rig, &spots)?;
    let masks = match a.shadows {
        ShadowMethod::Unmix => unmix_shadows(&cube, &depth, &rig, &spots, &g.kernel(), &cfg)?,
        ShadowMethod::Window => demux_shadows(&cube, &tof, &cfg)?,
    };
    let spec_cfg = SpecularConfig {
        min_amplitude: cfg.min_amplitude,
        ..SpecularConfig::default()
    };
    let specular = detect_specular(&cube, &depth, &rig, &spots, &spec_cfg)?;

    ensure_dir(&a.out)?;
    write_depth(&a.out.join("depth.sb3d"), &depth)?;
    write_tof(&a.out.join("tof.sb3d"), &tof)?;
    write_mask(&a.out.join("specular.pgm"), depth.n_x, depth.n_y, &specular)?;
    write_shadow_masks(&a.out.join("shadows"), &masks)?;
    println!(
        "{} of {} pixels with depth",
        depth.valid_count(),
        depth.len()
    );
    Ok(())
}

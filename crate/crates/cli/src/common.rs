use anyhow::Context;
use bounce_core::io::SceneSpec;
use bounce_core::render::{
    apply_sensor_model, CubeConfig, RenderConfig, Renderer, SensorModel, TransientCube,
};
use bounce_core::Error;
use clap::{Args, ValueEnum};
use std::fmt;
use std::path::{Path, PathBuf};

pub const THREADS_ENV: &str = "BOUNCE_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Noise {
    Off,
    /// Laser pulse, 50 ps FWHM jitter and Poisson counts (peak 10 to 400).
    Paper,
}

#[derive(Args, Debug, Clone)]
pub struct Globals {
    /// Seed for noise and procedural generation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Noise::Off)]
    pub noise: Noise,

    /// Time bins per histogram.
    #[arg(long, global = true, default_value_t = 637)]
    pub bins: usize,

    /// Bin width in picoseconds.
    #[arg(long = "delta-ps", global = true, default_value_t = 128.0)]
    pub delta_ps: f64,

    /// Square sensor resolution overriding the scene's rig.
    #[arg(long, global = true)]
    pub res: Option<usize>,
}

impl Globals {
    pub fn cube(&self) -> anyhow::Result<CubeConfig> {
        let cfg = CubeConfig {
            n_t: self.bins,
            delta_ps: self.delta_ps,
            ..CubeConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn render_config(&self) -> anyhow::Result<RenderConfig> {
        Ok(RenderConfig {
            cube: self.cube()?,
            ..RenderConfig::default()
        })
    }

    pub fn load_scene(&self, path: &Path) -> anyhow::Result<SceneSpec> {
        let spec =
            SceneSpec::load(path).with_context(|| format!("reading scene {}", path.display()))?;
        Ok(match self.res {
            Some(0) => return Err(invalid("--res must be at least 1")),
            Some(n) => spec.with_resolution(n, n),
            None => spec,
        })
    }

    /// Temporal response the demultiplexer should assume.
    pub fn kernel(&self) -> Vec<f64> {
        match self.noise {
            Noise::Off => vec![1.0],
            Noise::Paper => SensorModel::paper(self.delta_ps, self.seed, None).pulse_kernel,
        }
    }

    /// Renders the multiplexed capture, applying the sensor model when
    /// noise is on.
    pub fn capture(
        &self,
        r: &Renderer,
        cfg: &RenderConfig,
        seed: u64,
    ) -> anyhow::Result<TransientCube> {
        let cube = r.render(cfg)?;
        self.measure(r, cfg, cube, seed)
    }

    pub fn measure(
        &self,
        r: &Renderer,
        cfg: &RenderConfig,
        cube: TransientCube,
        seed: u64,
    ) -> anyhow::Result<TransientCube> {
        Ok(match self.noise {
            Noise::Off => cube,
            Noise::Paper => {
                let peak = r.max_two_bounce_weight(cfg.laser_power);
                apply_sensor_model(
                    &cube,
                    &SensorModel::paper(cfg.cube.delta_ps, seed, Some(peak)),
                )?
            }
        })
    }
}

/// A bad argument or input detected by the CLI itself.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

/// 2 for validation failures anywhere in the chain, 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<Invalid>() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::InvalidScene(_)
                | Error::InvalidRig(_)
                | Error::InvalidInput(_)
                | Error::GeometryMismatch(_)
                | Error::OutOfGate { .. }
                | Error::BadMagic { .. }
                | Error::VersionMismatch { .. }
                | Error::Truncated { .. }
                | Error::PlacementFailed { .. }
                | Error::PoseOutsideBounds
                | Error::Json(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

pub fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| invalid(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
    if n == 0 {
        return Err(invalid(format!("{THREADS_ENV} must be at least 1")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

/// `t.sb3d` with suffix `depth.sb3d` becomes `t.depth.sb3d`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

pub fn spot_cube_suffix(s: usize) -> String {
    format!("spot{s:03}.sb3d")
}

pub fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

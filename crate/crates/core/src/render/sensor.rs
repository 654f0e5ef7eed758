use super::cube::TransientCube;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// FWHM of a Gaussian in units of its standard deviation, `2 sqrt(2 ln 2)`.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

/// Timing jitter of the reference detector.
pub const PAPER_JITTER_FWHM_S: f64 = 50e-12;

/// Range of brightest two-bounce photon counts drawn by the noisy preset.
pub const PAPER_PEAK_COUNTS: (f64, f64) = (10.0, 400.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    /// Laser pulse sampled at the bin width; non-negative, unit sum. The
    /// kernel is centered on index `(len - 1) / 2`.
    pub pulse_kernel: Vec<f64>,
    /// Photon count assigned to the reference peak; `0` disables the
    /// rescale and Poisson stages.
    pub poisson_scale: f64,
    pub jitter_fwhm_s: f64,
    pub seed: u64,
    /// Value mapped to `poisson_scale`, normally the brightest two-bounce
    /// deposit. Defaults to the cube maximum after pulse convolution.
    pub reference_peak: Option<f64>,
}

impl SensorModel {
    /// Noise disabled: identity pulse, no jitter, no photon noise.
    pub fn noiseless() -> SensorModel {
        SensorModel {
            pulse_kernel: vec![1.0],
            poisson_scale: 0.0,
            jitter_fwhm_s: 0.0,
            seed: 0,
            reference_peak: None,
        }
    }

    /// Realistic-capture preset: exponentially modified Gaussian pulse,
    /// 50 ps FWHM jitter and a brightest two-bounce count drawn uniformly
    /// from 10 to 400 photons.
    pub fn paper(delta_ps: f64, seed: u64, reference_peak: Option<f64>) -> SensorModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5e75);
        let peak = rng.random_range(PAPER_PEAK_COUNTS.0..=PAPER_PEAK_COUNTS.1);
        SensorModel {
            pulse_kernel: exgaussian_pulse(delta_ps, 30.0, 60.0),
            poisson_scale: peak,
            jitter_fwhm_s: PAPER_JITTER_FWHM_S,
            seed,
            reference_peak,
        }
    }
}

/// Exponentially modified Gaussian pulse (`sigma_ps`, tail `tau_ps`)
/// sampled at bin centers around its mode, normalized to unit sum.
pub fn exgaussian_pulse(delta_ps: f64, sigma_ps: f64, tau_ps: f64) -> Vec<f64> {
    let pdf = |t: f64| {
        let lambda = 1.0 / tau_ps;
        let arg = (sigma_ps * sigma_ps * lambda - t) / (std::f64::consts::SQRT_2 * sigma_ps);
        0.5 * lambda * (lambda * (0.5 * lambda * sigma_ps * sigma_ps - t)).exp() * libm::erfc(arg)
    };
    // Locate the mode on a fine grid.
    let mode = (0..4000)
        .map(|i| -3.0 * sigma_ps + i as f64 * (3.0 * sigma_ps + 5.0 * tau_ps) / 4000.0)
        .fold((0.0, f64::MIN), |best, t| {
            if pdf(t) > best.1 {
                (t, pdf(t))
            } else {
                best
            }
        })
        .0;
    let half = ((3.0 * sigma_ps).max(5.0 * tau_ps) / delta_ps).ceil() as i64;
    let mut k: Vec<f64> = (-half..=half)
        .map(|j| pdf(mode + j as f64 * delta_ps).max(0.0))
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Bin-integrated zero-mean Gaussian with standard deviation `sigma_bins`,
/// indexed from `-half` to `half`.
pub fn gaussian_bin_kernel(sigma_bins: f64) -> Vec<f64> {
    let half = (6.0 * sigma_bins).ceil() as i64 + 1;
    let cdf = |x: f64| 0.5 * (1.0 + libm::erf(x / (sigma_bins * std::f64::consts::SQRT_2)));
    (-half..=half)
        .map(|m| cdf(m as f64 + 0.5) - cdf(m as f64 - 0.5))
        .collect()
}

/// Convolves every histogram with a kernel centered on `(len - 1) / 2`.
/// Mass shifted past either gate edge is dropped.
fn convolve_time(data: &[f64], n_t: usize, kernel: &[f64]) -> Vec<f64> {
    let c = (kernel.len() as i64 - 1) / 2;
    let mut out = vec![0.0; data.len()];
    out.par_chunks_mut(n_t)
        .zip(data.par_chunks(n_t))
        .for_each(|(o, h)| {
            for (t, &v) in h.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                for (j, &k) in kernel.iter().enumerate() {
                    let dst = t as i64 + j as i64 - c;
                    if dst >= 0 && (dst as usize) < n_t {
                        o[dst as usize] += v * k;
                    }
                }
            }
        });
    out
}

/// Poisson draw for bin `index` keyed only by `(seed, index)`.
pub fn poisson_sample(seed: u64, index: u64, mean: f64) -> f64 {
    if !(mean > 0.0) {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    Poisson::new(mean)
        .map(|d| d.sample(&mut rng))
        .unwrap_or(0.0)
}

/// Pulse convolution, rescale to photon counts, Gaussian timing jitter and
/// per-bin Poisson sampling.
pub fn apply_sensor_model(cube: &TransientCube, model: &SensorModel) -> Result<TransientCube> {
    let k = &model.pulse_kernel;
    if k.is_empty() || k.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput(
            "pulse kernel must be non-empty and non-negative".into(),
        ));
    }
    if (k.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput("pulse kernel must sum to 1".into()));
    }
    if k.len() > cube.n_t {
        return Err(Error::InvalidInput(format!(
            "pulse kernel of {} bins exceeds n_t = {}",
            k.len(),
            cube.n_t
        )));
    }
    if !(model.poisson_scale >= 0.0) || !(model.jitter_fwhm_s >= 0.0) {
        return Err(Error::InvalidInput(
            "poisson scale and jitter must be non-negative".into(),
        ));
    }

    let mut data: Vec<f64> = cube.data.iter().map(|&v| v as f64).collect();
    if k.len() > 1 {
        data = convolve_time(&data, cube.n_t, k);
    }

    let mut scale = 1.0;
    if model.poisson_scale > 0.0 {
        let reference = model
            .reference_peak
            .unwrap_or_else(|| data.iter().copied().fold(0.0, f64::max));
        scale = if reference > 0.0 {
            model.poisson_scale / reference
        } else {
            0.0
        };
    }

    if model.jitter_fwhm_s > 0.0 {
        let sigma_bins = model.jitter_fwhm_s / FWHM_PER_SIGMA / cube.delta_seconds();
        data = convolve_time(&data, cube.n_t, &gaussian_bin_kernel(sigma_bins));
    }

    let out: Vec<f32> = if model.poisson_scale > 0.0 {
        data.par_iter()
            .enumerate()
            .map(|(i, &v)| poisson_sample(model.seed, i as u64, v * scale) as f32)
            .collect()
    } else {
        data.iter().map(|&v| v as f32).collect()
    };
    Ok(TransientCube {
        data: out,
        ..cube.clone()
    })
}

/// Full width at half maximum of a sampled peak, in bins, by linear
/// interpolation of the half-maximum crossings.
pub fn measure_fwhm(h: &[f64]) -> Option<f64> {
    let (peak, &max) = h.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(max > 0.0) {
        return None;
    }
    let half = max * 0.5;
    let mut left = None;
    for i in (0..peak).rev() {
        if h[i] < half {
            left = Some(i as f64 + (half - h[i]) / (h[i + 1] - h[i]));
            break;
        }
    }
    let mut right = None;
    for i in peak + 1..h.len() {
        if h[i] < half {
            right = Some(i as f64 - (half - h[i]) / (h[i - 1] - h[i]));
            break;
        }
    }
    Some(right? - left?)
}

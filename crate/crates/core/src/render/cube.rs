use crate::error::{Error, Result};
use crate::geometry::SPEED_OF_LIGHT;
use serde::{Deserialize, Serialize};

/// Behaviour for a deposit whose pathlength falls outside the gate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GatePolicy {
    #[default]
    Error,
    Drop,
}

/// Temporal layout shared by every cube a pipeline produces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeConfig {
    pub n_t: usize,
    pub delta_ps: f64,
    pub gate_path_min: f64,
    pub out_of_gate: GatePolicy,
}

impl Default for CubeConfig {
    /// 128 ps bins over pathlengths 1 m to ~25.46 m.
    fn default() -> Self {
        CubeConfig {
            n_t: 637,
            delta_ps: 128.0,
            gate_path_min: 1.0,
            out_of_gate: GatePolicy::Error,
        }
    }
}

impl CubeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 {
            return Err(Error::InvalidInput("n_t must be at least 1".into()));
        }
        if !(self.delta_ps > 0.0 && self.delta_ps.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "bin width {} ps must be positive",
                self.delta_ps
            )));
        }
        if !self.gate_path_min.is_finite() {
            return Err(Error::InvalidInput("gate origin must be finite".into()));
        }
        Ok(())
    }

    /// Pathlength covered by one bin, `c * delta`.
    pub fn bin_path(&self) -> f64 {
        SPEED_OF_LIGHT * self.delta_ps * 1e-12
    }

    pub fn gate_path_max(&self) -> f64 {
        self.gate_path_min + self.n_t as f64 * self.bin_path()
    }

    /// Continuous bin coordinate: bin `k` spans `[k, k + 1)`.
    #[inline]
    pub fn position(&self, path: f64) -> f64 {
        (path - self.gate_path_min) / self.bin_path()
    }

    pub fn bin_of(&self, path: f64) -> Option<usize> {
        let p = self.position(path);
        (p >= 0.0 && p < self.n_t as f64).then(|| p.floor() as usize)
    }

    pub fn bin_center_path(&self, k: usize) -> f64 {
        self.gate_path_min + (k as f64 + 0.5) * self.bin_path()
    }

    /// Two-bin linear-interpolation split of a unit deposit at `path`.
    ///
    /// Mass is shared between the two bins whose centers bracket the
    /// deposit; in the outer half of the first or last bin the whole unit
    /// goes to that bin, so the split always sums to one.
    pub fn split(&self, path: f64) -> Result<Option<[(usize, f64); 2]>> {
        let p = self.position(path);
        if !(p >= 0.0 && p < self.n_t as f64) {
            return match self.out_of_gate {
                GatePolicy::Drop => Ok(None),
                GatePolicy::Error => Err(Error::OutOfGate {
                    path,
                    min: self.gate_path_min,
                    max: self.gate_path_max(),
                }),
            };
        }
        let f = p - 0.5;
        let k0 = f.floor();
        if k0 < 0.0 {
            return Ok(Some([(0, 1.0), (0, 0.0)]));
        }
        let k0 = k0 as usize;
        if k0 + 1 >= self.n_t {
            return Ok(Some([(self.n_t - 1, 1.0), (self.n_t - 1, 0.0)]));
        }
        let w1 = f - k0 as f64;
        Ok(Some([(k0, 1.0 - w1), (k0 + 1, w1)]))
    }
}

/// `n_x x n_y x n_t` histogram cube stored `(y, x, t)` row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransientCube {
    pub n_x: usize,
    pub n_y: usize,
    pub n_t: usize,
    pub delta_ps: f64,
    pub gate_path_min: f64,
    pub data: Vec<f32>,
}

impl TransientCube {
    pub fn zeros(n_x: usize, n_y: usize, cfg: &CubeConfig) -> TransientCube {
        TransientCube {
            n_x,
            n_y,
            n_t: cfg.n_t,
            delta_ps: cfg.delta_ps,
            gate_path_min: cfg.gate_path_min,
            data: vec![0.0; n_x * n_y * cfg.n_t],
        }
    }

    pub fn config(&self) -> CubeConfig {
        CubeConfig {
            n_t: self.n_t,
            delta_ps: self.delta_ps,
            gate_path_min: self.gate_path_min,
            out_of_gate: GatePolicy::Error,
        }
    }

    pub fn delta_seconds(&self) -> f64 {
        self.delta_ps * 1e-12
    }

    #[inline]
    pub fn offset(&self, x: usize, y: usize) -> usize {
        (y * self.n_x + x) * self.n_t
    }

    pub fn histogram(&self, x: usize, y: usize) -> &[f32] {
        let o = self.offset(x, y);
        &self.data[o..o + self.n_t]
    }

    pub fn histogram_mut(&mut self, x: usize, y: usize) -> &mut [f32] {
        let o = self.offset(x, y);
        let n_t = self.n_t;
        &mut self.data[o..o + n_t]
    }

    pub fn get(&self, x: usize, y: usize, t: usize) -> f32 {
        self.data[self.offset(x, y) + t]
    }

    pub fn same_geometry(&self, other: &TransientCube) -> bool {
        self.n_x == other.n_x
            && self.n_y == other.n_y
            && self.n_t == other.n_t
            && self.delta_ps == other.delta_ps
            && self.gate_path_min == other.gate_path_min
    }

    pub fn check_geometry(&self, other: &TransientCube) -> Result<()> {
        if self.same_geometry(other) {
            Ok(())
        } else {
            Err(Error::GeometryMismatch(format!(
                "{}x{}x{} @ {} ps from {} m vs {}x{}x{} @ {} ps from {} m",
                self.n_x,
                self.n_y,
                self.n_t,
                self.delta_ps,
                self.gate_path_min,
                other.n_x,
                other.n_y,
                other.n_t,
                other.delta_ps,
                other.gate_path_min
            )))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 {
            return Err(Error::InvalidInput("n_t must be at least 1".into()));
        }
        if self.data.len() != self.n_x * self.n_y * self.n_t {
            return Err(Error::InvalidInput(
                "payload length does not match dimensions".into(),
            ));
        }
        if let Some(v) = self.data.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "cube entry {v} is negative or non-finite"
            )));
        }
        Ok(())
    }

    /// Element-wise sum in place.
    pub fn accumulate(&mut self, other: &TransientCube) -> Result<()> {
        self.check_geometry(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        Ok(())
    }

    /// Time-integrated image, `I(u, v) = sum_t cube(u, v, t)`, row-major.
    pub fn intensity(&self) -> Vec<f64> {
        self.data
            .chunks(self.n_t)
            .map(|h| h.iter().map(|&v| v as f64).sum())
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum()
    }

    pub fn max_value(&self) -> f32 {
        self.data.iter().copied().fold(0.0, f32::max)
    }
}

/// Per-pixel accumulator: deposits for one spot land in an `f64` scratch
/// histogram and are folded into the pixel's `f32` bins in one pass, so the
/// result for a set of spots equals the bin-wise sum of single-spot results
/// added in spot order.
pub(crate) struct PixelAccumulator {
    scratch: Vec<f64>,
    lo: usize,
    hi: usize,
}

impl PixelAccumulator {
    pub fn new(n_t: usize) -> Self {
        PixelAccumulator {
            scratch: vec![0.0; n_t],
            lo: usize::MAX,
            hi: 0,
        }
    }

    pub fn deposit(&mut self, cfg: &CubeConfig, path: f64, weight: f64) -> Result<()> {
        if let Some(parts) = cfg.split(path)? {
            for (k, w) in parts {
                self.scratch[k] += weight * w;
                self.lo = self.lo.min(k);
                self.hi = self.hi.max(k);
            }
        }
        Ok(())
    }

    /// Folds the pending spot into `hist` and clears the scratch.
    pub fn flush(&mut self, hist: &mut [f32]) {
        if self.lo <= self.hi {
            let range = self.lo..=self.hi;
            for (h, s) in hist[range.clone()].iter_mut().zip(&mut self.scratch[range]) {
                *h += *s as f32;
                *s = 0.0;
            }
        }
        self.lo = usize::MAX;
        self.hi = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_gate_matches_dataset_geometry() {
        let cfg = CubeConfig::default();
        assert!((cfg.bin_path() - 0.0383734).abs() < 1e-6);
        assert!((cfg.gate_path_max() - 25.44).abs() < 0.03);
    }

    #[test]
    fn split_sums_to_one() {
        let cfg = CubeConfig {
            n_t: 10,
            delta_ps: 100.0,
            gate_path_min: 1.0,
            out_of_gate: GatePolicy::Error,
        };
        for i in 0..1000 {
            let path = 1.0 + cfg.bin_path() * 10.0 * (i as f64 + 0.5) / 1000.0;
            let [(a, wa), (b, wb)] = cfg.split(path).unwrap().unwrap();
            assert!((wa + wb - 1.0).abs() < 1e-12);
            assert!(a < 10 && b < 10);
            let p = cfg.position(path);
            assert!((a as f64 + 0.5 - p).abs() <= 1.0);
        }
    }

    #[test]
    fn split_at_bin_center_is_single_bin() {
        let cfg = CubeConfig {
            n_t: 10,
            delta_ps: 100.0,
            gate_path_min: 0.0,
            out_of_gate: GatePolicy::Error,
        };
        let [(a, wa), (_, wb)] = cfg.split(cfg.bin_center_path(4)).unwrap().unwrap();
        assert_eq!(a, 4);
        assert!((wa - 1.0).abs() < 1e-12 && wb.abs() < 1e-12);
    }

    #[test]
    fn out_of_gate_policies() {
        let mut cfg = CubeConfig {
            n_t: 10,
            delta_ps: 100.0,
            gate_path_min: 1.0,
            out_of_gate: GatePolicy::Error,
        };
        assert!(matches!(cfg.split(0.5), Err(Error::OutOfGate { .. })));
        assert!(matches!(cfg.split(100.0), Err(Error::OutOfGate { .. })));
        cfg.out_of_gate = GatePolicy::Drop;
        assert!(cfg.split(0.5).unwrap().is_none());
    }

    #[test]
    fn accumulator_folds_in_spot_order() {
        let cfg = CubeConfig {
            n_t: 8,
            delta_ps: 100.0,
            gate_path_min: 0.0,
            out_of_gate: GatePolicy::Error,
        };
        let mut acc = PixelAccumulator::new(8);
        let mut hist = vec![0.0f32; 8];
        acc.deposit(&cfg, cfg.bin_center_path(2), 0.1).unwrap();
        acc.deposit(&cfg, cfg.bin_center_path(2), 0.2).unwrap();
        acc.flush(&mut hist);
        acc.deposit(&cfg, cfg.bin_center_path(2), 0.3).unwrap();
        acc.flush(&mut hist);
        assert_eq!(hist[2], (0.1f64 + 0.2) as f32 + 0.3f64 as f32);
    }
}

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub bin: usize,
    pub amplitude: f64,
}

/// Local maxima above `min_amplitude`, greedily thinned so that no two kept
/// peaks lie within `min_separation_bins` of each other. Larger peaks win;
/// equal amplitudes keep the earlier bin. Returned in bin order.
///
/// A bin is a candidate when it is no lower than either neighbour and
/// strictly higher than at least one, so a flat run only qualifies at its
/// edges and a two-bin plateau from a split deposit is thinned to one.
pub fn extract_peaks<T: Copy + Into<f64>>(
    hist: &[T],
    min_amplitude: f64,
    min_separation_bins: usize,
) -> Vec<Peak> {
    let n = hist.len();
    let at = |i: usize| -> f64 { hist[i].into() };
    let mut cands: Vec<Peak> = (0..n)
        .filter_map(|k| {
            let v = at(k);
            if !(v > min_amplitude) {
                return None;
            }
            let left = if k > 0 { at(k - 1) } else { 0.0 };
            let right = if k + 1 < n { at(k + 1) } else { 0.0 };
            (v >= left && v >= right && (v > left || v > right)).then_some(Peak {
                bin: k,
                amplitude: v,
            })
        })
        .collect();

    cands.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude).then(a.bin.cmp(&b.bin)));
    let sep = min_separation_bins.max(1);
    let mut kept: Vec<Peak> = Vec::with_capacity(cands.len());
    for c in cands {
        if kept.iter().all(|k| k.bin.abs_diff(c.bin) > sep) {
            kept.push(c);
        }
    }
    kept.sort_by_key(|p| p.bin);
    kept
}

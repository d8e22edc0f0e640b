use serde::{Deserialize, Serialize};

use super::BreathSignal;

/// Peak acceptance rules for the time-domain rate route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakParams {
    /// Seconds. The default allows at most 40 breaths/min.
    pub min_separation: f64,
    /// °C.
    pub min_prominence: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        Self {
            min_separation: 60.0 / 40.0,
            min_prominence: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub index: usize,
    pub height: f64,
    pub prominence: f64,
}

/// Local maxima of `x`. A flat top counts once, at its (left-rounded) middle.
fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < x.len() {
        if x[i - 1] < x[i] {
            let mut j = i;
            while j + 1 < x.len() && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < x.len() && x[j + 1] < x[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Height above the higher of the two bases, where each base is the lowest
/// point between the peak and the nearest strictly higher sample (or the
/// signal edge) on that side.
fn prominence(x: &[f64], peak: usize) -> f64 {
    let h = x[peak];
    let mut left_min = h;
    for &v in x[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &x[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Peaks passing the prominence floor, thinned so no two are closer than
/// `min_separation`; on conflict the higher peak wins. Sorted by index.
pub fn find_peaks(sig: &BreathSignal, params: PeakParams) -> Vec<Peak> {
    let x = sig.samples();
    let min_distance = params.min_separation * sig.sample_rate();
    let mut candidates: Vec<Peak> = local_maxima(x)
        .into_iter()
        .map(|index| Peak {
            index,
            height: x[index],
            prominence: prominence(x, index),
        })
        .filter(|p| p.prominence >= params.min_prominence)
        .collect();
    candidates.sort_by(|a, b| b.height.total_cmp(&a.height).then(a.index.cmp(&b.index)));

    let mut kept: Vec<Peak> = Vec::new();
    for p in candidates {
        if kept
            .iter()
            .all(|k| (k.index.abs_diff(p.index) as f64) >= min_distance)
        {
            kept.push(p);
        }
    }
    kept.sort_by_key(|p| p.index);
    kept
}

pub fn count_peaks(sig: &BreathSignal, min_separation: f64, min_prominence: f64) -> usize {
    find_peaks(
        sig,
        PeakParams {
            min_separation,
            min_prominence,
        },
    )
    .len()
}

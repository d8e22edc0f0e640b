use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::Serialize;

use super::{BreathSignal, DspError};

/// One-sided power spectrum. `power` sums to the energy of the windowed,
/// mean-removed signal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub resolution: f64,
}

/// Result of a peak search over a frequency band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToneEstimate {
    /// Refined peak frequency, Hz.
    pub frequency: f64,
    /// Peak power over median in-band power.
    pub snr: f64,
    pub peak_power: f64,
    pub bin: usize,
}

/// Periodic Hann window.
pub(crate) fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Hann-windowed, zero-padded power spectrum.
///
/// The mean removed before windowing is the window-weighted mean, which
/// zeroes the DC bin exactly. `zero_pad_to` is raised to the signal length
/// if smaller.
pub fn periodogram(sig: &BreathSignal, zero_pad_to: usize) -> Result<Spectrum, DspError> {
    sig.require(8)?;
    let x = sig.samples();
    let n = x.len();
    let nfft = zero_pad_to.max(n);
    let w = hann(n);
    let wsum: f64 = w.iter().sum();
    let mean = x.iter().zip(&w).map(|(v, wi)| v * wi).sum::<f64>() / wsum;

    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); nfft];
    for ((b, v), wi) in buf.iter_mut().zip(x).zip(&w) {
        b.re = (v - mean) * wi;
    }
    FftPlanner::<f64>::new().plan_fft_forward(nfft).process(&mut buf);

    let half = nfft / 2;
    let scale = 1.0 / nfft as f64;
    let power = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * scale;
            if k == 0 || (nfft.is_multiple_of(2) && k == half) {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let resolution = sig.sample_rate() / nfft as f64;
    Ok(Spectrum {
        freqs: (0..=half).map(|k| k as f64 * resolution).collect(),
        power,
        resolution,
    })
}

/// Strongest bin in `[low, high]` refined by a parabola through its two
/// neighbours.
pub fn dominant_frequency(spec: &Spectrum, low: f64, high: f64) -> Result<ToneEstimate, DspError> {
    let band: Vec<usize> = spec
        .freqs
        .iter()
        .enumerate()
        .filter(|(_, f)| **f >= low && **f <= high)
        .map(|(i, _)| i)
        .collect();
    let Some(&first) = band.first() else {
        return Err(DspError::EmptyBand { low, high });
    };
    let k = band.iter().copied().fold(first, |best, i| {
        if spec.power[i] > spec.power[best] {
            i
        } else {
            best
        }
    });
    let peak = spec.power[k];

    let mut offset = 0.0;
    if k > 0 && k + 1 < spec.power.len() {
        let (a, b, c) = (spec.power[k - 1], peak, spec.power[k + 1]);
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            offset = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
        }
    }

    let mut in_band: Vec<f64> = band.iter().map(|&i| spec.power[i]).collect();
    in_band.sort_by(f64::total_cmp);
    let m = in_band.len();
    let median = if m % 2 == 1 {
        in_band[m / 2]
    } else {
        0.5 * (in_band[m / 2 - 1] + in_band[m / 2])
    };
    let snr = if peak <= 0.0 {
        1.0
    } else if median <= 0.0 {
        f64::INFINITY
    } else {
        peak / median
    };

    Ok(ToneEstimate {
        frequency: (k as f64 + offset) * spec.resolution,
        snr,
        peak_power: peak,
        bin: k,
    })
}

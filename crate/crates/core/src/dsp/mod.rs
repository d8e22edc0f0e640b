//! Breathing-signal math: ROI aggregation, detrending, zero-phase band-pass
//! filtering, and spectral / time-domain frequency estimation.

mod filter;
mod peaks;
mod series;
mod spectrum;

pub use filter::{bandpass, detrend, Biquad, BandpassDesign};
pub use peaks::{count_peaks, find_peaks, Peak, PeakParams};
pub use series::roi_mean_series;
pub use spectrum::{dominant_frequency, periodogram, Spectrum, ToneEstimate};

use serde::Serialize;
use thiserror::Error;

/// Default breathing band, Hz (6 to 51 breaths/min).
pub const DEFAULT_BAND: (f64, f64) = (0.1, 0.85);
pub const DEFAULT_ZERO_PAD: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("need at least {needed} samples, got {actual}")]
    TooFewSamples { needed: usize, actual: usize },
    #[error("band {low}..{high} Hz is not inside (0, {nyquist}) Hz")]
    BandOutsideNyquist { low: f64, high: f64, nyquist: f64 },
    #[error("no spectrum bins inside {low}..{high} Hz")]
    EmptyBand { low: f64, high: f64 },
    #[error("sample rate must be finite and > 0 (got {0})")]
    BadSampleRate(f64),
    #[error("signal contains non-finite samples")]
    NonFinite,
    #[error("track has {track} rects but the clip has {frames} frames")]
    TrackLength { track: usize, frames: usize },
    #[error("rect {0:?} is empty or outside the frame")]
    EmptyRect(crate::thermal::Rect),
}

/// A uniformly sampled temperature series in °C.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreathSignal {
    samples: Vec<f64>,
    sample_rate: f64,
    t0: f64,
}

impl BreathSignal {
    /// Validates finiteness and rate. Length is checked by the operations
    /// that need a minimum, so a one-sample series can still be represented.
    pub fn new(samples: Vec<f64>, sample_rate: f64, t0: f64) -> Result<Self, DspError> {
        if !sample_rate.is_finite() || sample_rate <= 0.0 {
            return Err(DspError::BadSampleRate(sample_rate));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(DspError::NonFinite);
        }
        Ok(Self {
            samples,
            sample_rate,
            t0,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Length in seconds, `n / sample_rate`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            samples,
            sample_rate: self.sample_rate,
            t0: self.t0,
        }
    }

    pub(crate) fn require(&self, needed: usize) -> Result<(), DspError> {
        if self.samples.len() < needed {
            return Err(DspError::TooFewSamples {
                needed,
                actual: self.samples.len(),
            });
        }
        Ok(())
    }
}

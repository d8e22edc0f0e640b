//! Respiratory rate from a band-passed nostril signal, and the four-way
//! breathing pattern.
//!
//! Two independent routes estimate the rate: the refined spectral peak and
//! a prominence-filtered peak count. They are fused by agreement, and the
//! pattern follows from the fused rate unless the signal is too weak to be
//! breathing at all.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::{
    count_peaks, dominant_frequency, periodogram, BreathSignal, DspError, PeakParams,
    DEFAULT_BAND, DEFAULT_ZERO_PAD,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RespirationError {
    #[error("signal spans {seconds:.2} s; at least {min:.1} s needed")]
    SignalTooShort { seconds: f64, min: f64 },
    #[error(transparent)]
    Dsp(#[from] DspError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BreathingPattern {
    Eupnea,
    Bradypnea,
    Tachypnea,
    Apnea,
}

impl BreathingPattern {
    pub const ALL: [BreathingPattern; 4] = [
        BreathingPattern::Eupnea,
        BreathingPattern::Bradypnea,
        BreathingPattern::Tachypnea,
        BreathingPattern::Apnea,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BreathingPattern::Eupnea => "Eupnea",
            BreathingPattern::Bradypnea => "Bradypnea",
            BreathingPattern::Tachypnea => "Tachypnea",
            BreathingPattern::Apnea => "Apnea",
        }
    }
}

impl fmt::Display for BreathingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pattern boundaries. Rates in breaths/min, RMS in °C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternThresholds {
    pub brady_max: f64,
    pub tachy_min: f64,
    pub apnea_rms: f64,
    pub apnea_snr: f64,
}

impl Default for PatternThresholds {
    fn default() -> Self {
        Self {
            brady_max: 12.0,
            tachy_min: 20.0,
            apnea_rms: 0.03,
            apnea_snr: 2.0,
        }
    }
}

impl PatternThresholds {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.brady_max > 0.0 && self.brady_max < self.tachy_min) {
            return Err("brady_max/tachy_min: need 0 < brady_max < tachy_min".into());
        }
        if !(self.apnea_rms >= 0.0 && self.apnea_snr >= 0.0) {
            return Err("apnea_rms/apnea_snr: must be non-negative".into());
        }
        Ok(())
    }

    /// Pattern for a breathing rate when the apnea gate did not fire.
    pub fn by_rate(&self, rate: f64) -> BreathingPattern {
        if rate < self.brady_max {
            BreathingPattern::Bradypnea
        } else if rate > self.tachy_min {
            BreathingPattern::Tachypnea
        } else {
            BreathingPattern::Eupnea
        }
    }
}

/// Rate-estimation knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub band_low: f64,
    pub band_high: f64,
    pub zero_pad_to: usize,
    pub peaks: PeakParams,
    /// Routes closer than this (breaths/min) agree.
    pub agreement_bpm: f64,
    /// On disagreement the spectral route wins at or above this SNR.
    pub spectral_snr_preference: f64,
    pub min_duration: f64,
}

impl Default for RateParams {
    fn default() -> Self {
        Self {
            band_low: DEFAULT_BAND.0,
            band_high: DEFAULT_BAND.1,
            zero_pad_to: DEFAULT_ZERO_PAD,
            peaks: PeakParams::default(),
            agreement_bpm: 4.0,
            spectral_snr_preference: 4.0,
            min_duration: 10.0,
        }
    }
}

/// Both routes and their fusion, all in breaths/min.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub spectral: f64,
    pub timedomain: f64,
    pub fused: f64,
    pub confidence: f64,
    pub snr: f64,
    pub peak_count: usize,
}

pub fn estimate_rate(sig: &BreathSignal) -> Result<RateEstimate, RespirationError> {
    estimate_rate_with(sig, &RateParams::default())
}

/// Expects a detrended, band-passed signal.
pub fn estimate_rate_with(sig: &BreathSignal, p: &RateParams) -> Result<RateEstimate, RespirationError> {
    let seconds = sig.duration();
    if seconds < p.min_duration {
        return Err(RespirationError::SignalTooShort {
            seconds,
            min: p.min_duration,
        });
    }
    let spectrum = periodogram(sig, p.zero_pad_to)?;
    let tone = dominant_frequency(&spectrum, p.band_low, p.band_high)?;
    let spectral = 60.0 * tone.frequency;
    let peak_count = count_peaks(sig, p.peaks.min_separation, p.peaks.min_prominence);
    let timedomain = 60.0 * peak_count as f64 / seconds;

    let agree = (spectral - timedomain).abs() <= p.agreement_bpm;
    let fused = if agree || tone.snr >= p.spectral_snr_preference {
        spectral
    } else {
        timedomain
    };
    let confidence = (tone.snr / 10.0).min(1.0) * if agree { 1.0 } else { 0.5 };
    Ok(RateEstimate {
        spectral,
        timedomain,
        fused,
        confidence,
        snr: tone.snr,
        peak_count,
    })
}

/// Apnea when the band-limited signal is too quiet or has no clear tone;
/// otherwise by the fused rate.
pub fn classify_pattern(sig: &BreathSignal, rates: &RateEstimate, th: &PatternThresholds) -> BreathingPattern {
    if sig.rms() < th.apnea_rms || rates.snr < th.apnea_snr {
        BreathingPattern::Apnea
    } else {
        th.by_rate(rates.fused)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RespirationEstimate {
    /// Breaths/min; 0 exactly when the pattern is Apnea.
    pub rate: f64,
    pub pattern: BreathingPattern,
    pub confidence: f64,
    pub rate_spectral: f64,
    pub rate_timedomain: f64,
    pub snr: f64,
    pub rms: f64,
}

impl RespirationEstimate {
    /// Builds an estimate directly; the rate is zeroed for Apnea.
    pub fn new(rate: f64, pattern: BreathingPattern, confidence: f64) -> Self {
        Self {
            rate: if pattern == BreathingPattern::Apnea { 0.0 } else { rate },
            pattern,
            confidence,
            rate_spectral: rate,
            rate_timedomain: rate,
            snr: 0.0,
            rms: 0.0,
        }
    }
}

/// Rate, pattern and confidence for a detrended, band-passed signal.
pub fn assess(
    sig: &BreathSignal,
    params: &RateParams,
    th: &PatternThresholds,
) -> Result<RespirationEstimate, RespirationError> {
    let rates = estimate_rate_with(sig, params)?;
    let pattern = classify_pattern(sig, &rates, th);
    Ok(RespirationEstimate {
        rate: if pattern == BreathingPattern::Apnea {
            0.0
        } else {
            rates.fused
        },
        pattern,
        confidence: rates.confidence,
        rate_spectral: rates.spectral,
        rate_timedomain: rates.timedomain,
        snr: rates.snr,
        rms: sig.rms(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{bandpass, detrend};
    use std::f64::consts::PI;

    const FS: f64 = 8.7;

    fn prepared(x: Vec<f64>) -> BreathSignal {
        let raw = BreathSignal::new(x, FS, 0.0).unwrap();
        bandpass(&detrend(&raw).unwrap(), 0.1, 0.85).unwrap()
    }

    fn breathing(bpm: f64, amp: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| 33.0 - amp * (2.0 * PI * bpm / 60.0 * i as f64 / FS).cos())
            .collect()
    }

    #[test]
    fn clean_fifteen_bpm() {
        let sig = prepared(breathing(15.0, 0.4, 130));
        let r = estimate_rate(&sig).unwrap();
        assert!((r.fused - 15.0).abs() <= 0.6, "{r:?}");
        assert!(r.confidence >= 0.8, "{r:?}");
    }

    #[test]
    fn constant_signal_degenerates() {
        let sig = prepared(vec![33.0; 130]);
        let r = estimate_rate(&sig).unwrap();
        assert_eq!(r.peak_count, 0);
        assert!(r.snr <= 1.0 + 1e-9 || sig.rms() < 1e-9);
        let p = classify_pattern(&sig, &r, &PatternThresholds::default());
        assert_eq!(p, BreathingPattern::Apnea);
    }

    #[test]
    fn too_short() {
        let sig = prepared(breathing(15.0, 0.4, 80));
        assert!(matches!(
            estimate_rate(&sig),
            Err(RespirationError::SignalTooShort { .. })
        ));
    }

    fn rates_with(fused: f64, snr: f64) -> RateEstimate {
        RateEstimate {
            spectral: fused,
            timedomain: fused,
            fused,
            confidence: 1.0,
            snr,
            peak_count: 0,
        }
    }

    fn sine_with_rms(rms: f64) -> BreathSignal {
        let amp = rms * 2f64.sqrt();
        // whole number of cycles so the sampled RMS is exact
        let x = (0..200).map(|i| amp * (2.0 * PI * i as f64 / 20.0).sin()).collect();
        BreathSignal::new(x, FS, 0.0).unwrap()
    }

    #[test]
    fn classification_examples() {
        let th = PatternThresholds::default();
        let sig = sine_with_rms(0.25);
        assert_eq!(classify_pattern(&sig, &rates_with(15.0, 8.0), &th), BreathingPattern::Eupnea);
        assert_eq!(classify_pattern(&sig, &rates_with(26.0, 8.0), &th), BreathingPattern::Tachypnea);
        assert_eq!(classify_pattern(&sig, &rates_with(8.0, 8.0), &th), BreathingPattern::Bradypnea);
        assert_eq!(classify_pattern(&sig, &rates_with(12.0, 8.0), &th), BreathingPattern::Eupnea);
        assert_eq!(classify_pattern(&sig, &rates_with(20.0, 8.0), &th), BreathingPattern::Eupnea);
        assert_eq!(classify_pattern(&sig, &rates_with(15.0, 1.5), &th), BreathingPattern::Apnea);
        let quiet = sine_with_rms(0.01);
        assert_eq!(classify_pattern(&quiet, &rates_with(15.0, 8.0), &th), BreathingPattern::Apnea);
    }

    #[test]
    fn apnea_zeroes_rate() {
        let e = RespirationEstimate::new(17.0, BreathingPattern::Apnea, 0.5);
        assert_eq!(e.rate, 0.0);
        let sig = prepared(vec![33.0; 130]);
        let a = assess(&sig, &RateParams::default(), &PatternThresholds::default()).unwrap();
        assert_eq!(a.pattern, BreathingPattern::Apnea);
        assert_eq!(a.rate, 0.0);
    }

    #[test]
    fn offset_before_detrend_changes_nothing() {
        let x = breathing(18.0, 0.3, 130);
        let shifted: Vec<f64> = x.iter().map(|v| v + 5.0).collect();
        let th = PatternThresholds::default();
        let a = assess(&prepared(x), &RateParams::default(), &th).unwrap();
        let b = assess(&prepared(shifted), &RateParams::default(), &th).unwrap();
        assert!((a.rate - b.rate).abs() < 1e-9);
        assert_eq!(a.pattern, b.pattern);
    }

    #[test]
    fn amplification_never_creates_apnea() {
        let th = PatternThresholds::default();
        let base = breathing(16.0, 0.1, 130);
        let p0 = assess(&prepared(base.clone()), &RateParams::default(), &th).unwrap().pattern;
        assert_ne!(p0, BreathingPattern::Apnea);
        for alpha in [1.5, 2.0, 5.0, 20.0] {
            let x = base.iter().map(|v| v * alpha).collect();
            let p = assess(&prepared(x), &RateParams::default(), &th).unwrap().pattern;
            assert_ne!(p, BreathingPattern::Apnea, "alpha {alpha}");
        }
    }

    #[test]
    fn fused_rate_is_monotone_over_clean_grid() {
        let mut prev = f64::NEG_INFINITY;
        for bpm in (6..=30).step_by(2) {
            let r = estimate_rate(&prepared(breathing(bpm as f64, 0.4, 130))).unwrap();
            assert!(r.fused >= prev, "{bpm}: {} < {prev}", r.fused);
            prev = r.fused;
        }
    }

    #[test]
    fn thresholds_validate() {
        assert!(PatternThresholds::default().validate().is_ok());
        let bad = PatternThresholds {
            brady_max: 25.0,
            ..PatternThresholds::default()
        };
        assert!(bad.validate().is_err());
    }
}

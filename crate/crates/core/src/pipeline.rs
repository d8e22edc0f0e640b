//! End-to-end analysis of a clip: detect, track, extract the breathing
//! signal, estimate rate and temperature, and screen.

use serde::Serialize;
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::dsp::{bandpass, detrend, periodogram, roi_mean_series, BreathSignal, DspError, Spectrum};
use crate::respiration::{assess, RespirationError, RespirationEstimate};
use crate::roi::{detect_face, detect_forehead, detect_nostril, track_with, RegionName, RoiError, RoiTrack};
use crate::screening::{estimate_body_temp, screen, ScreeningError, ScreeningReport, TemperatureEstimate};
use crate::thermal::{calibrate, RadiometricClip, Rect};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("clip has no frames")]
    EmptyClip,
    #[error(transparent)]
    Roi(#[from] RoiError),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Respiration(#[from] RespirationError),
    #[error(transparent)]
    Screening(#[from] ScreeningError),
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::EmptyClip => "EMPTY_CLIP",
            PipelineError::Roi(e) => e.code(),
            PipelineError::Dsp(_) => "SIGNAL_ERROR",
            PipelineError::Respiration(RespirationError::SignalTooShort { .. }) => "SIGNAL_TOO_SHORT",
            PipelineError::Respiration(_) => "SIGNAL_ERROR",
            PipelineError::Screening(_) => "DEGENERATE_TRACK",
        }
    }
}

/// Everything the pipeline computed, kept for plotting and inspection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    /// Frames analysed (the trailing window of the clip).
    pub frames: usize,
    pub face: Rect,
    pub forehead: RoiTrack,
    pub nostril: RoiTrack,
    /// Nostril ROI mean per frame, °C.
    pub raw: BreathSignal,
    /// Detrended and band-passed `raw`.
    pub filtered: BreathSignal,
    pub spectrum: Spectrum,
    pub respiration: RespirationEstimate,
    pub temperature: TemperatureEstimate,
    pub report: ScreeningReport,
    /// Detection steps that fell back to a default region.
    pub fallbacks: Vec<&'static str>,
}

/// Trailing `window_seconds` of the clip, or all of it if shorter.
pub fn analysis_window(clip: &RadiometricClip, window_seconds: f64) -> RadiometricClip {
    let n = (window_seconds * clip.fps() + 1e-9).floor() as usize;
    clip.tail(n.min(clip.len()))
}

/// Runs the full pipeline; any detection failure is an error.
pub fn analyze(clip: &RadiometricClip, cfg: &PipelineConfig) -> Result<Analysis, PipelineError> {
    run(clip, cfg, false)
}

/// Like [`analyze`], but a missing face falls back to the whole frame and a
/// missing breathing region to the geometric nostril position, so any
/// non-empty clip can be plotted.
pub fn analyze_lenient(clip: &RadiometricClip, cfg: &PipelineConfig) -> Result<Analysis, PipelineError> {
    run(clip, cfg, true)
}

/// Central lower-face patch where the nostrils usually sit.
pub fn geometric_nostril(face: Rect) -> Rect {
    let (w, h) = ((face.w / 3).max(1), (face.h / 6).max(1));
    let y = (face.y + face.h * 11 / 20).min(face.bottom() - h);
    Rect::new(face.x + (face.w - w) / 2, y, w, h)
}

fn run(clip: &RadiometricClip, cfg: &PipelineConfig, lenient: bool) -> Result<Analysis, PipelineError> {
    if clip.is_empty() {
        return Err(PipelineError::EmptyClip);
    }
    let window = analysis_window(clip, cfg.window_seconds);
    let first = calibrate(&window.frames()[0], window.calibration());
    let mut fallbacks = Vec::new();

    let face = match detect_face(&first) {
        Ok(r) => r,
        Err(RoiError::NoFaceFound { .. }) if lenient => {
            fallbacks.push("face");
            first.bounds()
        }
        Err(e) => return Err(e.into()),
    };
    let forehead_rect = match cfg.forehead_rect {
        Some(r) => r,
        None => detect_forehead(&first, face)?,
    };
    let nostril_rect = match cfg.nostril_rect {
        Some(r) => r,
        None => match detect_nostril(&window, face, &cfg.probe()) {
            Ok(r) => r,
            Err(RoiError::NoBreathingRegion { .. } | RoiError::ProbeTooShort { .. }) if lenient => {
                fallbacks.push("nostril");
                geometric_nostril(face)
            }
            Err(e) => return Err(e.into()),
        },
    };

    let tracker = cfg.tracker();
    let forehead = track_with(&window, forehead_rect, RegionName::Forehead, &tracker)?;
    let nostril = track_with(&window, nostril_rect, RegionName::Nostril, &tracker)?;

    let raw = roi_mean_series(&window, &nostril)?;
    let filtered = bandpass(&detrend(&raw)?, cfg.band_low_hz, cfg.band_high_hz)?;
    let spectrum = periodogram(&filtered, cfg.zero_pad_to)?;
    let respiration = assess(&filtered, &cfg.rate_params(), &cfg.thresholds())?;
    let temperature = estimate_body_temp(&window, &forehead)?;
    let window_seconds = window.len() as f64 / window.fps();
    let report = screen(&temperature, &respiration, &cfg.rules(), window_seconds);

    Ok(Analysis {
        frames: window.len(),
        face,
        forehead,
        nostril,
        raw,
        filtered,
        spectrum,
        respiration,
        temperature,
        report,
        fallbacks,
    })
}

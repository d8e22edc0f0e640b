//! Flat JSON configuration holding every tunable of the pipeline.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::{PeakParams, DEFAULT_BAND, DEFAULT_ZERO_PAD};
use crate::respiration::{PatternThresholds, RateParams};
use crate::roi::{NostrilProbe, TrackerParams};
use crate::screening::ScreeningRules;
use crate::thermal::Rect;

/// Consulted when no `--config` flag is given.
pub const CONFIG_ENV: &str = "RESPISCREEN_CONFIG";

/// Shortest analysis window accepted, seconds.
pub const MIN_WINDOW_SECONDS: f64 = 10.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub band_low_hz: f64,
    pub band_high_hz: f64,

    pub brady_max: f64,
    pub tachy_min: f64,
    pub apnea_rms: f64,
    pub apnea_snr: f64,

    pub fever_threshold: f64,
    pub skin_to_core_offset: f64,
    pub require_eupnea: bool,
    pub rate_hard_max: f64,
    pub rate_hard_min: f64,
    pub min_confidence: f64,

    pub probe_seconds: f64,
    pub search_radius: usize,
    pub coast_threshold: f64,
    pub template_context: usize,
    pub window_seconds: f64,

    pub zero_pad_to: usize,
    pub peak_min_separation_s: f64,
    pub peak_min_prominence_c: f64,
    pub agreement_bpm: f64,
    pub spectral_snr_preference: f64,
    pub min_signal_seconds: f64,

    /// Skip detection and use this rect in the first analysed frame.
    pub forehead_rect: Option<Rect>,
    pub nostril_rect: Option<Rect>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let th = PatternThresholds::default();
        let rules = ScreeningRules::default();
        let rate = RateParams::default();
        let tracker = TrackerParams::default();
        let probe = NostrilProbe::default();
        Self {
            band_low_hz: DEFAULT_BAND.0,
            band_high_hz: DEFAULT_BAND.1,
            brady_max: th.brady_max,
            tachy_min: th.tachy_min,
            apnea_rms: th.apnea_rms,
            apnea_snr: th.apnea_snr,
            fever_threshold: rules.fever_threshold,
            skin_to_core_offset: rules.skin_to_core_offset,
            require_eupnea: rules.require_eupnea,
            rate_hard_max: rules.rate_hard_max,
            rate_hard_min: rules.rate_hard_min,
            min_confidence: rules.min_confidence,
            probe_seconds: probe.seconds,
            search_radius: tracker.search_radius,
            coast_threshold: tracker.coast_threshold,
            template_context: tracker.context,
            window_seconds: 15.0,
            zero_pad_to: DEFAULT_ZERO_PAD,
            peak_min_separation_s: rate.peaks.min_separation,
            peak_min_prominence_c: rate.peaks.min_prominence,
            agreement_bpm: rate.agreement_bpm,
            spectral_snr_preference: rate.spectral_snr_preference,
            min_signal_seconds: rate.min_duration,
            forehead_rect: None,
            nostril_rect: None,
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// `explicit` if given, else the file named by [`CONFIG_ENV`], else
    /// defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self, ConfigError> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.band_low_hz > 0.0 && self.band_low_hz < self.band_high_hz && self.band_high_hz.is_finite()) {
            return Err(invalid("band_low_hz", "need 0 < band_low_hz < band_high_hz"));
        }
        self.thresholds().validate().map_err(|r| invalid("brady_max", r))?;
        self.rules().validate().map_err(|r| invalid("fever_threshold", r))?;
        if !(self.window_seconds.is_finite() && self.window_seconds >= MIN_WINDOW_SECONDS) {
            return Err(invalid(
                "window_seconds",
                format!("must be at least {MIN_WINDOW_SECONDS} s (got {})", self.window_seconds),
            ));
        }
        if !(self.probe_seconds.is_finite() && self.probe_seconds > 0.0) {
            return Err(invalid("probe_seconds", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.coast_threshold) {
            return Err(invalid("coast_threshold", "must lie in [0, 1]"));
        }
        if self.zero_pad_to == 0 {
            return Err(invalid("zero_pad_to", "must be > 0"));
        }
        for (field, v) in [
            ("peak_min_separation_s", self.peak_min_separation_s),
            ("peak_min_prominence_c", self.peak_min_prominence_c),
            ("agreement_bpm", self.agreement_bpm),
            ("spectral_snr_preference", self.spectral_snr_preference),
            ("min_signal_seconds", self.min_signal_seconds),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(field, "must be finite and >= 0"));
            }
        }
        for (field, r) in [("forehead_rect", self.forehead_rect), ("nostril_rect", self.nostril_rect)] {
            if matches!(r, Some(r) if r.w == 0 || r.h == 0) {
                return Err(invalid(field, "rect must be non-empty"));
            }
        }
        Ok(())
    }

    pub fn thresholds(&self) -> PatternThresholds {
        PatternThresholds {
            brady_max: self.brady_max,
            tachy_min: self.tachy_min,
            apnea_rms: self.apnea_rms,
            apnea_snr: self.apnea_snr,
        }
    }

    pub fn rules(&self) -> ScreeningRules {
        ScreeningRules {
            fever_threshold: self.fever_threshold,
            skin_to_core_offset: self.skin_to_core_offset,
            require_eupnea: self.require_eupnea,
            rate_hard_max: self.rate_hard_max,
            rate_hard_min: self.rate_hard_min,
            min_confidence: self.min_confidence,
        }
    }

    pub fn rate_params(&self) -> RateParams {
        RateParams {
            band_low: self.band_low_hz,
            band_high: self.band_high_hz,
            zero_pad_to: self.zero_pad_to,
            peaks: PeakParams {
                min_separation: self.peak_min_separation_s,
                min_prominence: self.peak_min_prominence_c,
            },
            agreement_bpm: self.agreement_bpm,
            spectral_snr_preference: self.spectral_snr_preference,
            min_duration: self.min_signal_seconds,
        }
    }

    pub fn tracker(&self) -> TrackerParams {
        TrackerParams {
            search_radius: self.search_radius,
            coast_threshold: self.coast_threshold,
            context: self.template_context,
        }
    }

    pub fn probe(&self) -> NostrilProbe {
        NostrilProbe {
            seconds: self.probe_seconds,
            band_low: self.band_low_hz,
            band_high: self.band_high_hz,
            search_radius: self.search_radius,
        }
    }
}

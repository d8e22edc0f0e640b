//! Body temperature from the forehead track and the rule-based screening
//! decision.
//!
//! Rules, applied in this order, accumulate coded reasons:
//!
//! | reason              | fires when                                              |
//! |---------------------|---------------------------------------------------------|
//! | `FEVER`             | body temp + skin-to-core offset ≥ fever threshold       |
//! | `ABNORMAL_PATTERN`  | `require_eupnea` and the pattern is not Eupnea          |
//! | `RATE_OUT_OF_RANGE` | not Apnea and rate outside `[rate_hard_min, rate_hard_max]` |
//! | `LOW_CONFIDENCE`    | nothing above fired and confidence < `min_confidence`  |
//!
//! Any of the first three makes the decision `Alert`; `LOW_CONFIDENCE` alone
//! makes it `Inconclusive`; no reasons is `Pass`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::respiration::{BreathingPattern, RespirationEstimate};
use crate::roi::RoiTrack;
use crate::thermal::RadiometricClip;

/// Plausible skin temperatures; outside this band the estimate is flagged.
pub const SANE_TEMPERATURE: (f64, f64) = (25.0, 45.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScreeningError {
    #[error("forehead track has {track} rects for {frames} frames")]
    DegenerateTrack { track: usize, frames: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureEstimate {
    pub body_temp: f64,
    pub per_frame_p95: Vec<f64>,
    pub method: &'static str,
    /// False when `body_temp` falls outside [`SANE_TEMPERATURE`].
    pub valid: bool,
}

impl TemperatureEstimate {
    pub fn from_value(body_temp: f64) -> Self {
        Self {
            body_temp,
            per_frame_p95: vec![body_temp],
            method: "given",
            valid: (SANE_TEMPERATURE.0..=SANE_TEMPERATURE.1).contains(&body_temp),
        }
    }
}

/// Nearest-rank percentile: the value at rank `ceil(p * n)` of the sorted
/// sample (1-based).
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median over frames of the per-frame 95th percentile of forehead pixels.
pub fn estimate_body_temp(
    clip: &RadiometricClip,
    forehead: &RoiTrack,
) -> Result<TemperatureEstimate, ScreeningError> {
    if forehead.rects.len() != clip.len() || clip.is_empty() {
        return Err(ScreeningError::DegenerateTrack {
            track: forehead.rects.len(),
            frames: clip.len(),
        });
    }
    let cal = clip.calibration();
    let width = clip.width();
    let mut per_frame = Vec::with_capacity(clip.len());
    let mut counts = Vec::new();
    for (frame, r) in clip.frames().iter().zip(&forehead.rects) {
        if !r.fits(width, clip.height()) {
            return Err(ScreeningError::DegenerateTrack {
                track: forehead.rects.len(),
                frames: clip.len(),
            });
        }
        counts.clear();
        for y in r.y..r.bottom() {
            counts.extend_from_slice(&frame.counts()[y * width + r.x..y * width + r.right()]);
        }
        // calibration is monotone, so rank on counts then convert
        counts.sort_unstable();
        let n = counts.len();
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        per_frame.push(cal.to_celsius(counts[rank - 1]));
    }
    let body_temp = median(per_frame.clone());
    Ok(TemperatureEstimate {
        body_temp,
        per_frame_p95: per_frame,
        method: "p95-median",
        valid: (SANE_TEMPERATURE.0..=SANE_TEMPERATURE.1).contains(&body_temp),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningRules {
    pub fever_threshold: f64,
    /// Added to the forehead estimate before the fever comparison.
    pub skin_to_core_offset: f64,
    pub require_eupnea: bool,
    pub rate_hard_max: f64,
    pub rate_hard_min: f64,
    pub min_confidence: f64,
}

impl Default for ScreeningRules {
    fn default() -> Self {
        Self {
            fever_threshold: 37.3,
            skin_to_core_offset: 0.0,
            require_eupnea: true,
            rate_hard_max: 30.0,
            rate_hard_min: 6.0,
            min_confidence: 0.3,
        }
    }
}

impl ScreeningRules {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.fever_threshold > 35.0 && self.fever_threshold < 42.0) {
            return Err("fever_threshold: must lie in (35, 42) °C".into());
        }
        if !(self.rate_hard_min < self.rate_hard_max) {
            return Err("rate_hard_min: must be below rate_hard_max".into());
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err("min_confidence: must lie in [0, 1]".into());
        }
        if !self.skin_to_core_offset.is_finite() {
            return Err("skin_to_core_offset: must be finite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    Fever,
    AbnormalPattern,
    RateOutOfRange,
    LowConfidence,
}

impl Reason {
    pub fn code(&self) -> &'static str {
        match self {
            Reason::Fever => "FEVER",
            Reason::AbnormalPattern => "ABNORMAL_PATTERN",
            Reason::RateOutOfRange => "RATE_OUT_OF_RANGE",
            Reason::LowConfidence => "LOW_CONFIDENCE",
        }
    }

    fn is_alert(&self) -> bool {
        !matches!(self, Reason::LowConfidence)
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Pass,
    Alert,
    Inconclusive,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::Pass => "Pass",
            Decision::Alert => "Alert",
            Decision::Inconclusive => "Inconclusive",
        }
    }

    /// Process exit code for the `analyze` command.
    pub fn exit_code(&self) -> i32 {
        match self {
            Decision::Pass => 0,
            Decision::Alert => 2,
            Decision::Inconclusive => 3,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningReport {
    /// Forehead estimate with the skin-to-core offset applied.
    pub body_temp: f64,
    pub respiration: RespirationEstimate,
    pub decision: Decision,
    pub reasons: Vec<Reason>,
    pub window_seconds: f64,
}

/// Fixed wire layout of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub body_temp_c: f64,
    pub rate_bpm: f64,
    pub pattern: BreathingPattern,
    pub confidence: f64,
    pub decision: Decision,
    pub reasons: Vec<Reason>,
    pub window_seconds: f64,
}

impl ScreeningReport {
    pub fn to_json_value(&self) -> ReportJson {
        ReportJson {
            body_temp_c: round_to(self.body_temp, 3),
            rate_bpm: round_to(self.respiration.rate, 3),
            pattern: self.respiration.pattern,
            confidence: round_to(self.respiration.confidence, 3),
            decision: self.decision,
            reasons: self.reasons.clone(),
            window_seconds: round_to(self.window_seconds, 3),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("report serialises")
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let reasons = if self.reasons.is_empty() {
            "none".to_string()
        } else {
            self.reasons.iter().map(Reason::code).collect::<Vec<_>>().join(",")
        };
        format!(
            "{}: {:.2} °C, {:.1} breaths/min, {}, confidence {:.2}, reasons {} ({:.1} s window)",
            self.decision,
            self.body_temp,
            self.respiration.rate,
            self.respiration.pattern,
            self.respiration.confidence,
            reasons,
            self.window_seconds,
        )
    }
}

fn round_to(v: f64, places: i32) -> f64 {
    let s = 10f64.powi(places);
    (v * s).round() / s
}

/// Applies the screening rules. An implausible temperature skips the fever
/// rule and counts as a failed measurement.
pub fn screen(
    temp: &TemperatureEstimate,
    resp: &RespirationEstimate,
    rules: &ScreeningRules,
    window_seconds: f64,
) -> ScreeningReport {
    let body_temp = temp.body_temp + rules.skin_to_core_offset;
    let mut reasons = Vec::new();
    if temp.valid && body_temp >= rules.fever_threshold {
        reasons.push(Reason::Fever);
    }
    if rules.require_eupnea && resp.pattern != BreathingPattern::Eupnea {
        reasons.push(Reason::AbnormalPattern);
    }
    if resp.pattern != BreathingPattern::Apnea
        && !(rules.rate_hard_min..=rules.rate_hard_max).contains(&resp.rate)
    {
        reasons.push(Reason::RateOutOfRange);
    }
    if reasons.is_empty() && (resp.confidence < rules.min_confidence || !temp.valid) {
        reasons.push(Reason::LowConfidence);
    }
    let decision = if reasons.iter().any(Reason::is_alert) {
        Decision::Alert
    } else if reasons.is_empty() {
        Decision::Pass
    } else {
        Decision::Inconclusive
    };
    ScreeningReport {
        body_temp,
        respiration: *resp,
        decision,
        reasons,
        window_seconds,
    }
}

//! Deterministic thermal-clip simulator of a masked face with known
//! breathing, used as ground truth for every end-to-end check.
//!
//! Scene model, per frame at time `t`:
//!
//! - background at `background_temp`;
//! - an elliptical face at `face_temp`;
//! - a forehead patch (upper-central third of the face box) at `forehead_temp`;
//! - a nostril/mask patch (lower-central face) at
//!   `nostril_baseline + breath_amplitude * w(t) + drift * t`, where `w` is the
//!   normalised breathing waveform, positive on exhale, zero inside apnea
//!   windows;
//! - the whole face shifted horizontally by
//!   `round(sway_amplitude * sin(2πt / sway_period))` pixels;
//! - per-pixel Gaussian noise, then quantisation to sensor counts.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::respiration::{BreathingPattern, PatternThresholds};
use crate::rng::gaussian_at;
use crate::thermal::{Calibration, RadiometricClip, RadiometricFrame, Rect};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("scenario JSON: {0}")]
    Parse(String),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Face ellipse in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceEllipse {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
}

impl Default for FaceEllipse {
    fn default() -> Self {
        Self {
            cx: 80.0,
            cy: 60.0,
            rx: 30.0,
            ry: 40.0,
        }
    }
}

impl FaceEllipse {
    /// Pixel-center inclusion test, with the face shifted right by `shift`.
    fn contains(&self, px: usize, py: usize, shift: i64) -> bool {
        let dx = (px as f64 + 0.5 - (self.cx + shift as f64)) / self.rx;
        let dy = (py as f64 + 0.5 - self.cy) / self.ry;
        dx * dx + dy * dy <= 1.0
    }
}

/// A simulated recording. Temperatures in °C, times in seconds, rates in
/// breaths/min, lengths in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub duration: f64,
    pub fps: f64,
    pub width: usize,
    pub height: usize,
    pub face: FaceEllipse,
    pub forehead_temp: f64,
    pub face_temp: f64,
    pub background_temp: f64,
    pub nostril_baseline: f64,
    pub breath_amplitude: f64,
    pub breath_rate: f64,
    /// Fraction of each cycle spent exhaling, in (0, 1).
    pub waveform_asymmetry: f64,
    pub apnea_windows: Vec<[f64; 2]>,
    /// °C per second, nostril patch only.
    pub drift: f64,
    pub noise_sigma: f64,
    pub sway_amplitude: f64,
    pub sway_period: f64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            duration: 15.0,
            fps: 8.7,
            width: 160,
            height: 120,
            face: FaceEllipse::default(),
            forehead_temp: 36.6,
            face_temp: 34.5,
            background_temp: 24.0,
            nostril_baseline: 33.0,
            breath_amplitude: 0.4,
            breath_rate: 15.0,
            waveform_asymmetry: 0.5,
            apnea_windows: Vec::new(),
            drift: 0.0,
            noise_sigma: 0.0,
            sway_amplitude: 0.0,
            sway_period: 4.0,
            seed: 0,
        }
    }
}

/// Per-frame oracle data for a rendered scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub face_rects: Vec<Rect>,
    pub forehead_rects: Vec<Rect>,
    pub nostril_rects: Vec<Rect>,
    /// Breaths/min; 0 for Apnea.
    pub true_rate: f64,
    pub true_pattern: BreathingPattern,
    /// `w(t)` per frame, in [-1, 1].
    pub breath_waveform: Vec<f64>,
    /// Horizontal face shift per frame, px.
    pub sway_offsets: Vec<i64>,
}

/// Trailing interval the ground-truth pattern is judged over, seconds.
pub const TRUTH_WINDOW: f64 = 15.0;

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.fps + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let positive = |field, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be finite and > 0 (got {v})")))
            }
        };
        let non_negative = |field, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be finite and >= 0 (got {v})")))
            }
        };
        let finite = |field, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, "must be finite"))
            }
        };
        positive("duration", self.duration)?;
        positive("fps", self.fps)?;
        if self.frame_count() < 2 {
            return Err(invalid("duration", "duration * fps must be at least 2 frames"));
        }
        for (field, v) in [("width", self.width), ("height", self.height)] {
            if v == 0 || v > usize::from(u16::MAX) {
                return Err(invalid(field, format!("must be in 1..=65535 (got {v})")));
            }
        }
        positive("face", self.face.rx)?;
        positive("face", self.face.ry)?;
        finite("face", self.face.cx)?;
        finite("face", self.face.cy)?;
        for (field, v) in [
            ("forehead_temp", self.forehead_temp),
            ("face_temp", self.face_temp),
            ("background_temp", self.background_temp),
            ("nostril_baseline", self.nostril_baseline),
            ("drift", self.drift),
        ] {
            finite(field, v)?;
        }
        non_negative("breath_amplitude", self.breath_amplitude)?;
        positive("breath_rate", self.breath_rate)?;
        if !(self.waveform_asymmetry > 0.0 && self.waveform_asymmetry < 1.0) {
            return Err(invalid("waveform_asymmetry", "must lie strictly between 0 and 1"));
        }
        non_negative("noise_sigma", self.noise_sigma)?;
        non_negative("sway_amplitude", self.sway_amplitude)?;
        positive("sway_period", self.sway_period)?;

        let reach = self.sway_amplitude.round();
        let f = &self.face;
        if f.cx - f.rx - reach < 0.0
            || f.cx + f.rx + reach > self.width as f64
            || f.cy - f.ry < 0.0
            || f.cy + f.ry > self.height as f64
        {
            return Err(invalid("face", "ellipse (including sway) must lie inside the frame"));
        }
        let face_box = self.face_box();
        if face_box.h < 6 || face_box.w < 3 {
            return Err(invalid("face", "face is too small to hold forehead and nostril patches"));
        }

        let mut windows = self.apnea_windows.clone();
        windows.sort_by(|a, b| a[0].total_cmp(&b[0]));
        for w in &windows {
            if !(w[0].is_finite() && w[1].is_finite() && 0.0 <= w[0] && w[0] < w[1] && w[1] <= self.duration) {
                return Err(invalid("apnea_windows", format!("window {w:?} must satisfy 0 <= start < end <= duration")));
            }
        }
        if windows.windows(2).any(|p| p[1][0] < p[0][1]) {
            return Err(invalid("apnea_windows", "windows overlap"));
        }
        Ok(())
    }

    /// Bounding box of the unshifted face's pixels.
    pub fn face_box(&self) -> Rect {
        let f = &self.face;
        let x0 = (f.cx - f.rx).floor().max(0.0) as usize;
        let y0 = (f.cy - f.ry).floor().max(0.0) as usize;
        let x1 = ((f.cx + f.rx).ceil() as usize).min(self.width);
        let y1 = ((f.cy + f.ry).ceil() as usize).min(self.height);
        let (mut bx0, mut by0, mut bx1, mut by1) = (usize::MAX, usize::MAX, 0, 0);
        for y in y0..y1 {
            for x in x0..x1 {
                if f.contains(x, y, 0) {
                    bx0 = bx0.min(x);
                    by0 = by0.min(y);
                    bx1 = bx1.max(x);
                    by1 = by1.max(y);
                }
            }
        }
        if bx0 == usize::MAX {
            return Rect::new(x0, y0, 0, 0);
        }
        Rect::new(bx0, by0, bx1 - bx0 + 1, by1 - by0 + 1)
    }

    /// Forehead patch: half the face width, a sixth of its height, centred,
    /// occupying the lower half of the face's top third.
    pub fn forehead_patch(&self) -> Rect {
        let f = self.face_box();
        let w = f.w / 2;
        Rect::new(f.x + (f.w - w) / 2, f.y + f.h / 6, w, f.h / 6)
    }

    /// Nostril patch: a third of the face width, a sixth of its height,
    /// centred, starting 55% of the way down the face.
    pub fn nostril_patch(&self) -> Rect {
        let f = self.face_box();
        let w = f.w / 3;
        Rect::new(f.x + (f.w - w) / 2, f.y + f.h * 11 / 20, w, f.h / 6)
    }

    pub fn in_apnea(&self, t: f64) -> bool {
        self.apnea_windows.iter().any(|w| t >= w[0] && t < w[1])
    }

    /// Normalised breathing waveform: an asymmetric raised cosine rising from
    /// -1 to 1 over the exhale fraction of the cycle and falling back over
    /// the rest. With asymmetry 0.5 this is `-cos(2π f t)`.
    pub fn waveform(&self, t: f64) -> f64 {
        if self.in_apnea(t) {
            return 0.0;
        }
        let phase = (t * self.breath_rate / 60.0).rem_euclid(1.0);
        let a = self.waveform_asymmetry;
        if phase < a {
            -(std::f64::consts::PI * phase / a).cos()
        } else {
            (std::f64::consts::PI * (phase - a) / (1.0 - a)).cos()
        }
    }

    pub fn sway_at(&self, t: f64) -> i64 {
        (self.sway_amplitude * (TAU * t / self.sway_period).sin()).round() as i64
    }

    /// Pattern the default classifier should report on the trailing window.
    pub fn true_pattern(&self) -> BreathingPattern {
        let th = PatternThresholds::default();
        let start = (self.duration - TRUTH_WINDOW).max(0.0);
        let span = self.duration - start;
        let covered: f64 = self
            .apnea_windows
            .iter()
            .map(|w| (w[1].min(self.duration) - w[0].max(start)).max(0.0))
            .sum();
        // sinusoid RMS is amplitude / sqrt(2)
        if self.breath_amplitude / 2f64.sqrt() < th.apnea_rms || covered >= 0.5 * span {
            BreathingPattern::Apnea
        } else {
            th.by_rate(self.breath_rate)
        }
    }
}

/// Renders the scenario. Bit-identical for identical input.
pub fn render(s: &Scenario) -> Result<(RadiometricClip, GroundTruth), ScenarioError> {
    s.validate()?;
    let cal = Calibration::default();
    let n = s.frame_count();
    let fps_milli = (s.fps * 1000.0).round();
    let fps = fps_milli / 1000.0;
    let (w, h) = (s.width, s.height);

    let face_box = s.face_box();
    let forehead = s.forehead_patch();
    let nostril = s.nostril_patch();

    let mut frames = Vec::with_capacity(n);
    let mut truth = GroundTruth {
        face_rects: Vec::with_capacity(n),
        forehead_rects: Vec::with_capacity(n),
        nostril_rects: Vec::with_capacity(n),
        true_rate: 0.0,
        true_pattern: s.true_pattern(),
        breath_waveform: Vec::with_capacity(n),
        sway_offsets: Vec::with_capacity(n),
    };
    truth.true_rate = if truth.true_pattern == BreathingPattern::Apnea {
        0.0
    } else {
        s.breath_rate
    };

    for i in 0..n {
        let t = i as f64 / fps;
        let shift = s.sway_at(t);
        let wave = s.waveform(t);
        let nostril_temp = s.nostril_baseline + s.breath_amplitude * wave + s.drift * t;
        let shifted = |r: Rect| r.offset_by(shift, 0).expect("validated sway keeps face in frame");
        let (fh, ns) = (shifted(forehead), shifted(nostril));

        let mut counts = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let base = if fh.contains(x, y) {
                    s.forehead_temp
                } else if ns.contains(x, y) {
                    nostril_temp
                } else if s.face.contains(x, y, shift) {
                    s.face_temp
                } else {
                    s.background_temp
                };
                let noisy = if s.noise_sigma > 0.0 {
                    base + s.noise_sigma * gaussian_at(s.seed, i as u64, (y * w + x) as u64)
                } else {
                    base
                };
                counts.push(cal.to_count(noisy));
            }
        }
        let ts = (i as f64 * 1e6 / fps).round() as u64;
        frames.push(RadiometricFrame::new(w, h, counts, ts).expect("dimensions validated"));

        truth.face_rects.push(shifted(face_box));
        truth.forehead_rects.push(fh);
        truth.nostril_rects.push(ns);
        truth.breath_waveform.push(wave);
        truth.sway_offsets.push(shift);
    }

    let clip = RadiometricClip::new(w, h, s.fps, cal, frames).expect("rendered clip is valid");
    Ok((clip, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode_clip;
    use crate::dsp::roi_mean_series;
    use crate::roi::{RegionName, RoiTrack};

    fn quiet() -> Scenario {
        Scenario {
            breath_amplitude: 0.0,
            ..Scenario::default()
        }
    }

    #[test]
    fn default_geometry() {
        let s = Scenario::default();
        assert_eq!(s.frame_count(), 130);
        assert_eq!(s.face_box(), Rect::new(50, 20, 60, 80));
        assert_eq!(s.forehead_patch(), Rect::new(65, 33, 30, 13));
        assert_eq!(s.nostril_patch(), Rect::new(70, 64, 20, 13));
    }

    #[test]
    fn static_scene_renders_identical_frames() {
        let (clip, truth) = render(&quiet()).unwrap();
        let first = clip.frames()[0].counts();
        assert!(clip.frames().iter().all(|f| f.counts() == first));
        let track = RoiTrack {
            region: RegionName::Nostril,
            rects: truth.nostril_rects.clone(),
            quality: vec![1.0; clip.len()],
        };
        let series = roi_mean_series(&clip, &track).unwrap();
        assert!(series.samples().iter().all(|v| *v == series.samples()[0]));
    }

    #[test]
    fn fifteen_bpm_is_a_quarter_hertz_sinusoid() {
        let s = Scenario::default();
        let (clip, truth) = render(&s).unwrap();
        let track = RoiTrack {
            region: RegionName::Nostril,
            rects: truth.nostril_rects,
            quality: vec![1.0; clip.len()],
        };
        let series = roi_mean_series(&clip, &track).unwrap();
        for (i, v) in series.samples().iter().enumerate() {
            let t = i as f64 / clip.fps();
            let want = 33.0 - 0.4 * (TAU * 0.25 * t).cos();
            assert!((v - want).abs() <= 0.005 + 1e-9, "frame {i}: {v} vs {want}");
        }
    }

    #[test]
    fn mean_over_truth_rects_follows_the_model() {
        let s = Scenario {
            breath_rate: 22.0,
            waveform_asymmetry: 0.35,
            drift: 0.05,
            sway_amplitude: 2.0,
            apnea_windows: vec![[6.0, 8.5]],
            ..Scenario::default()
        };
        let (clip, truth) = render(&s).unwrap();
        let track = RoiTrack {
            region: RegionName::Nostril,
            rects: truth.nostril_rects.clone(),
            quality: vec![1.0; clip.len()],
        };
        let series = roi_mean_series(&clip, &track).unwrap();
        for (i, v) in series.samples().iter().enumerate() {
            let t = i as f64 / clip.fps();
            let want = 33.0 + 0.4 * truth.breath_waveform[i] + 0.05 * t;
            assert!((v - want).abs() <= 0.005 + 1e-9);
        }
    }

    #[test]
    fn sway_moves_rects_exactly() {
        let s = Scenario {
            sway_amplitude: 3.0,
            ..Scenario::default()
        };
        let (clip, truth) = render(&s).unwrap();
        for (i, r) in truth.nostril_rects.iter().enumerate() {
            let t = i as f64 / clip.fps();
            let expect = (3.0 * (TAU * t / 4.0).sin()).round() as i64;
            assert_eq!(r.x as i64 - 70, expect);
            assert_eq!(truth.face_rects[i].x as i64 - 50, expect);
        }
    }

    #[test]
    fn forehead_is_hottest_region() {
        let (clip, truth) = render(&Scenario {
            drift: 0.05,
            ..Scenario::default()
        })
        .unwrap();
        for (i, r) in truth.forehead_rects.iter().enumerate() {
            let f = clip.celsius_frame(i);
            let max = f.temps().iter().cloned().fold(f64::MIN, f64::max);
            let inside = f.window(*r).fold(f64::MIN, f64::max);
            assert_eq!(inside, max);
            let outside = (0..f.temps().len())
                .filter(|k| !r.contains(k % f.width(), k / f.width()))
                .map(|k| f.temps()[k])
                .fold(f64::MIN, f64::max);
            assert!(outside < max);
        }
    }

    #[test]
    fn waveform_shape() {
        let s = Scenario {
            breath_rate: 12.0,
            waveform_asymmetry: 0.25,
            ..Scenario::default()
        };
        // 5 s period: trough at 0, crest after 1.25 s of exhale
        assert!((s.waveform(0.0) + 1.0).abs() < 1e-12);
        assert!((s.waveform(1.25) - 1.0).abs() < 1e-12);
        assert!((s.waveform(5.0) + 1.0).abs() < 1e-9);
        let s = Scenario {
            apnea_windows: vec![[2.0, 3.0]],
            ..s
        };
        assert_eq!(s.waveform(2.5), 0.0);
    }

    #[test]
    fn rendering_is_deterministic() {
        let s = Scenario {
            noise_sigma: 0.05,
            sway_amplitude: 2.0,
            seed: 7,
            ..Scenario::default()
        };
        let a = encode_clip(&render(&s).unwrap().0);
        let b = encode_clip(&render(&s).unwrap().0);
        assert_eq!(a, b);
        let c = encode_clip(&render(&Scenario { seed: 8, ..s }).unwrap().0);
        assert_ne!(a, c);
    }

    #[test]
    fn truth_pattern_follows_thresholds() {
        let p = |rate: f64| Scenario { breath_rate: rate, ..Scenario::default() }.true_pattern();
        assert_eq!(p(8.0), BreathingPattern::Bradypnea);
        assert_eq!(p(15.0), BreathingPattern::Eupnea);
        assert_eq!(p(26.0), BreathingPattern::Tachypnea);
        assert_eq!(quiet().true_pattern(), BreathingPattern::Apnea);
        let covered = Scenario {
            apnea_windows: vec![[0.0, 15.0]],
            ..Scenario::default()
        };
        assert_eq!(covered.true_pattern(), BreathingPattern::Apnea);
        let (_, truth) = render(&covered).unwrap();
        assert_eq!(truth.true_rate, 0.0);
    }

    #[test]
    fn validation_names_the_field() {
        let cases: Vec<(Scenario, &str)> = vec![
            (Scenario { duration: 0.0, ..Scenario::default() }, "duration"),
            (Scenario { duration: 0.1, ..Scenario::default() }, "duration"),
            (Scenario { fps: -1.0, ..Scenario::default() }, "fps"),
            (Scenario { breath_amplitude: -0.1, ..Scenario::default() }, "breath_amplitude"),
            (Scenario { waveform_asymmetry: 1.0, ..Scenario::default() }, "waveform_asymmetry"),
            (Scenario { sway_amplitude: 55.0, ..Scenario::default() }, "face"),
            (Scenario { apnea_windows: vec![[2.0, 5.0], [4.0, 6.0]], ..Scenario::default() }, "apnea_windows"),
            (Scenario { apnea_windows: vec![[10.0, 16.0]], ..Scenario::default() }, "apnea_windows"),
            (Scenario { breath_rate: 0.0, ..Scenario::default() }, "breath_rate"),
        ];
        for (s, field) in cases {
            match s.validate() {
                Err(ScenarioError::Invalid { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected {field} error, got {other:?}"),
            }
        }
    }

    #[test]
    fn json_rejects_unknown_keys_and_fills_defaults() {
        let s = Scenario::from_json(r#"{"breath_rate": 18, "seed": 3}"#).unwrap();
        assert_eq!(s.breath_rate, 18.0);
        assert_eq!(s.fps, 8.7);
        assert!(matches!(
            Scenario::from_json(r#"{"breath_rate": 18, "colour": "red"}"#),
            Err(ScenarioError::Parse(_))
        ));
        let full = serde_json::to_string(&Scenario::default()).unwrap();
        assert_eq!(Scenario::from_json(&full).unwrap(), Scenario::default());
    }
}

use serde::{Deserialize, Serialize};

use super::track::{track_with, TrackerParams};
use super::{RegionName, RoiError};
use crate::dsp::{BandpassDesign, DEFAULT_BAND};
use crate::thermal::{CelsiusFrame, RadiometricClip, Rect};

const HISTOGRAM_BINS: usize = 256;
const MIN_FACE_FRACTION: f64 = 0.02;
const BREATHING_NOISE_FLOOR: f64 = 1e-6;

/// Otsu's threshold over a 256-bin histogram spanning the frame's range.
/// Returns `None` for a constant frame.
pub fn otsu_threshold(values: &[f64]) -> Option<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return None;
    }
    let span = hi - lo;
    let bin_of = |v: f64| (((v - lo) / span * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
    let mut hist = [0u64; HISTOGRAM_BINS];
    for &v in values {
        hist[bin_of(v)] += 1;
    }

    let total = values.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let (mut best, mut best_t) = (-1.0, 0);
    for (t, &c) in hist.iter().enumerate().take(HISTOGRAM_BINS - 1) {
        w0 += c as f64;
        sum0 += t as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best {
            best = between;
            best_t = t;
        }
    }
    // pixels in bins above best_t are foreground
    Some(lo + (best_t + 1) as f64 * span / HISTOGRAM_BINS as f64)
}

/// Bounding box of the largest 4-connected warm component.
pub fn detect_face(frame: &CelsiusFrame) -> Result<Rect, RoiError> {
    let (w, h) = (frame.width(), frame.height());
    let min_area = ((w * h) as f64 * MIN_FACE_FRACTION).ceil() as usize;
    let no_face = RoiError::NoFaceFound { min_area };
    let threshold = otsu_threshold(frame.temps()).ok_or(no_face.clone())?;
    let warm: Vec<bool> = frame.temps().iter().map(|&t| t >= threshold).collect();

    let mut seen = vec![false; w * h];
    let mut best: Option<(usize, Rect)> = None;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !warm[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut area, mut x0, mut y0, mut x1, mut y1) = (0, w, h, 0, 0);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            area += 1;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            let mut visit = |j: usize| {
                if warm[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        let bbox = Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1);
        let better = match &best {
            None => true,
            Some((a, r)) => area > *a || (area == *a && (bbox.x, bbox.y) < (r.x, r.y)),
        };
        if better {
            best = Some((area, bbox));
        }
    }
    match best {
        Some((area, rect)) if area >= min_area => Ok(rect),
        _ => Err(no_face),
    }
}

fn check_face(face: Rect, width: usize, height: usize) -> Result<(), RoiError> {
    if !face.fits(width, height) {
        return Err(RoiError::OutOfBounds {
            rect: face,
            width,
            height,
        });
    }
    if face.h < 6 {
        return Err(RoiError::FaceTooSmall { height: face.h });
    }
    Ok(())
}

/// Finds the `size` window inside `area` maximising `score`'s sum, scanning
/// x-major so ties resolve leftmost, then topmost.
fn best_window(area: Rect, size: (usize, usize), score: impl Fn(usize, usize) -> f64) -> (Rect, f64) {
    let (ww, wh) = size;
    let mut best = (Rect::new(area.x, area.y, ww, wh), f64::NEG_INFINITY);
    for x in area.x..=area.right() - ww {
        for y in area.y..=area.bottom() - wh {
            let mut s = 0.0;
            for yy in y..y + wh {
                for xx in x..x + ww {
                    s += score(xx, yy);
                }
            }
            if s > best.1 {
                best = (Rect::new(x, y, ww, wh), s);
            }
        }
    }
    best
}

/// The warmest `w/2 × h/6` window in the top third of the face box.
pub fn detect_forehead(frame: &CelsiusFrame, face: Rect) -> Result<Rect, RoiError> {
    check_face(face, frame.width(), frame.height())?;
    let size = ((face.w / 2).max(1), face.h / 6);
    let top = Rect::new(face.x, face.y, face.w, face.h / 3);
    Ok(best_window(top, size, |x, y| frame.at(x, y)).0)
}

/// Settings for locating the breathing region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NostrilProbe {
    /// Seconds from the start of the clip used to build the variance map.
    pub seconds: f64,
    pub band_low: f64,
    pub band_high: f64,
    /// Radius of the face tracker used to motion-compensate the probe.
    pub search_radius: usize,
}

impl Default for NostrilProbe {
    fn default() -> Self {
        Self {
            seconds: 5.0,
            band_low: DEFAULT_BAND.0,
            band_high: DEFAULT_BAND.1,
            search_radius: 8,
        }
    }
}

/// The `w/3 × h/6` window in the bottom half of the face whose pixels carry
/// the most breathing-band variance over the probe interval.
///
/// Pixel series are sampled in face-aligned coordinates: the face box is
/// tracked first, so head sway does not show up as variance at edges.
pub fn detect_nostril(
    clip: &RadiometricClip,
    face: Rect,
    probe: &NostrilProbe,
) -> Result<Rect, RoiError> {
    let (width, height) = (clip.width(), clip.height());
    check_face(face, width, height)?;
    let needed = ((probe.seconds * clip.fps()).round() as usize).max(2);
    if clip.len() < needed {
        return Err(RoiError::ProbeTooShort {
            needed,
            available: clip.len(),
        });
    }
    let design = BandpassDesign::butterworth(2, probe.band_low, probe.band_high, clip.fps())?;

    let probe_clip = clip_prefix(clip, needed);
    let params = TrackerParams {
        search_radius: probe.search_radius,
        ..TrackerParams::default()
    };
    // the region label is irrelevant for the face box
    let face_track = track_with(&probe_clip, face, RegionName::Nostril, &params)?;
    let shifts: Vec<(i64, i64)> = face_track
        .rects
        .iter()
        .map(|r| (r.x as i64 - face.x as i64, r.y as i64 - face.y as i64))
        .collect();

    let lower = Rect::new(face.x, face.y + face.h / 2, face.w, face.h - face.h / 2);
    let cal = clip.calibration();
    let mut variance = vec![0.0; lower.area()];
    let mut series = vec![0.0; needed];
    for (k, v) in variance.iter_mut().enumerate() {
        let (px, py) = (lower.x + k % lower.w, lower.y + k / lower.w);
        // relative to the first sample in exact integer counts, so a global
        // offset cannot change the result
        let mut origin = None;
        for (i, frame) in probe_clip.frames().iter().enumerate() {
            let (dx, dy) = shifts[i];
            let x = (px as i64 + dx).clamp(0, width as i64 - 1) as usize;
            let y = (py as i64 + dy).clamp(0, height as i64 - 1) as usize;
            let c = i32::from(frame.counts()[y * width + x]);
            let base = *origin.get_or_insert(c);
            series[i] = cal.slope() * f64::from(c - base);
        }
        let filtered = design.filtfilt(&series);
        let mean = filtered.iter().sum::<f64>() / needed as f64;
        *v = filtered.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / needed as f64;
    }

    let size = ((face.w / 3).max(1), (face.h / 6).max(1));
    let (rect, total) = best_window(lower, size, |x, y| {
        variance[(y - lower.y) * lower.w + (x - lower.x)]
    });
    let mean_variance = total / (size.0 * size.1) as f64;
    if mean_variance < BREATHING_NOISE_FLOOR {
        return Err(RoiError::NoBreathingRegion {
            variance: mean_variance,
        });
    }
    Ok(rect)
}

fn clip_prefix(clip: &RadiometricClip, n: usize) -> RadiometricClip {
    RadiometricClip::from_parts(
        clip.width(),
        clip.height(),
        clip.fps_milli(),
        clip.calibration(),
        clip.frames()[..n].to_vec(),
    )
    .expect("prefix of a valid clip is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::{Calibration, RadiometricFrame};
    use std::f64::consts::PI;

    fn frame_with(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> CelsiusFrame {
        let temps = (0..w * h).map(|i| f(i % w, i / w)).collect();
        CelsiusFrame::new(w, h, temps).unwrap()
    }

    #[test]
    fn uniform_frame_has_no_face() {
        let f = CelsiusFrame::uniform(64, 48, 24.0);
        assert!(matches!(detect_face(&f), Err(RoiError::NoFaceFound { .. })));
    }

    #[test]
    fn largest_blob_wins() {
        // 100x100 frame: a 10% blob (20x50) and a 3% blob (10x30)
        let big = Rect::new(5, 10, 20, 50);
        let small = Rect::new(70, 60, 10, 30);
        let f = frame_with(100, 100, |x, y| {
            if big.contains(x, y) || small.contains(x, y) {
                34.0
            } else {
                24.0
            }
        });
        assert_eq!(detect_face(&f).unwrap(), big);
    }

    #[test]
    fn blob_below_area_floor_is_rejected() {
        // 1% of the frame
        let blob = Rect::new(10, 10, 10, 10);
        let f = frame_with(100, 100, |x, y| if blob.contains(x, y) { 34.0 } else { 24.0 });
        assert!(matches!(detect_face(&f), Err(RoiError::NoFaceFound { min_area: 200 })));
    }

    #[test]
    fn otsu_splits_two_levels() {
        let mut v = vec![24.0; 900];
        v.extend(vec![34.0; 100]);
        let t = otsu_threshold(&v).unwrap();
        assert!(t > 24.0 && t <= 34.0);
        assert!(otsu_threshold(&[5.0; 10]).is_none());
    }

    #[test]
    fn forehead_prefers_warm_patch() {
        let face = Rect::new(10, 10, 40, 60);
        let hot = Rect::new(22, 20, 20, 10);
        let f = frame_with(64, 80, |x, y| {
            if hot.contains(x, y) {
                36.6
            } else if face.contains(x, y) {
                34.5
            } else {
                24.0
            }
        });
        assert_eq!(detect_forehead(&f, face).unwrap(), hot);
    }

    #[test]
    fn uniform_face_takes_leftmost_topmost_window() {
        let face = Rect::new(3, 4, 30, 36);
        let f = CelsiusFrame::uniform(40, 44, 34.5);
        assert_eq!(detect_forehead(&f, face).unwrap(), Rect::new(3, 4, 15, 6));
    }

    #[test]
    fn short_face_is_rejected() {
        let f = CelsiusFrame::uniform(40, 40, 34.5);
        assert!(matches!(
            detect_forehead(&f, Rect::new(0, 0, 20, 5)),
            Err(RoiError::FaceTooSmall { height: 5 })
        ));
    }

    /// 60x60 face in an 80x80 frame with an oscillating 10x5 patch at `(px, py)`.
    fn breathing_clip(px: usize, py: usize, amp: f64, offset: f64) -> RadiometricClip {
        let fps = 8.7;
        let cal = Calibration::default();
        let face = Rect::new(10, 10, 60, 60);
        let patch = Rect::new(px, py, 10, 5);
        let frames = (0..60)
            .map(|i| {
                let t = i as f64 / fps;
                let breath = amp * (2.0 * PI * 0.3 * t).sin();
                let counts = (0..80 * 80)
                    .map(|k| {
                        let (x, y) = (k % 80, k / 80);
                        let c = if patch.contains(x, y) {
                            33.0 + breath
                        } else if face.contains(x, y) {
                            34.5
                        } else {
                            24.0
                        };
                        cal.to_count(c + offset)
                    })
                    .collect();
                RadiometricFrame::new(80, 80, counts, (i as f64 * 1e6 / fps).round() as u64).unwrap()
            })
            .collect();
        RadiometricClip::new(80, 80, fps, cal, frames).unwrap()
    }

    #[test]
    fn nostril_is_the_breathing_patch() {
        let clip = breathing_clip(35, 50, 0.4, 0.0);
        let r = detect_nostril(&clip, Rect::new(10, 10, 60, 60), &NostrilProbe::default()).unwrap();
        assert_eq!(r.w, 20);
        assert_eq!(r.h, 10);
        assert!(r.contains(35, 50) && r.contains(44, 54), "{r:?}");
    }

    #[test]
    fn nostril_detection_ignores_global_offset() {
        let face = Rect::new(10, 10, 60, 60);
        let a = detect_nostril(&breathing_clip(35, 50, 0.4, 0.0), face, &NostrilProbe::default()).unwrap();
        let b = detect_nostril(&breathing_clip(35, 50, 0.4, 3.0), face, &NostrilProbe::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn silent_face_has_no_breathing_region() {
        let clip = breathing_clip(35, 50, 0.0, 0.0);
        let err = detect_nostril(&clip, Rect::new(10, 10, 60, 60), &NostrilProbe::default()).unwrap_err();
        assert!(matches!(err, RoiError::NoBreathingRegion { .. }));
    }

    #[test]
    fn breathing_in_upper_half_is_not_searched() {
        let clip = breathing_clip(35, 15, 0.4, 0.0);
        let err = detect_nostril(&clip, Rect::new(10, 10, 60, 60), &NostrilProbe::default()).unwrap_err();
        assert!(matches!(err, RoiError::NoBreathingRegion { .. }));
    }

    #[test]
    fn probe_longer_than_clip() {
        let clip = breathing_clip(35, 50, 0.4, 0.0);
        let probe = NostrilProbe {
            seconds: 30.0,
            ..NostrilProbe::default()
        };
        assert!(matches!(
            detect_nostril(&clip, Rect::new(10, 10, 60, 60), &probe),
            Err(RoiError::ProbeTooShort { .. })
        ));
    }
}

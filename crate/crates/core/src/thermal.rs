//! Radiometric frames, clips and the linear count → °C calibration.
//!
//! Sensor data is kept as raw 16-bit counts; temperatures only exist after
//! [`calibrate`]. Everything in this crate is in degrees Celsius.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Problems constructing thermal values.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermalError {
    #[error("calibration slope must be finite and > 0 (got {0})")]
    BadSlope(f64),
    #[error("calibration offset must be finite (got {0})")]
    BadOffset(f64),
    #[error("frame dimensions must be positive and fit in 16 bits (got {width}x{height})")]
    BadDimensions { width: usize, height: usize },
    #[error("frame {index}: expected {expected} counts, got {actual}")]
    CountMismatch {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("frame {index} is {width}x{height}, clip is {clip_width}x{clip_height}")]
    MixedDimensions {
        index: usize,
        width: usize,
        height: usize,
        clip_width: usize,
        clip_height: usize,
    },
    #[error("frame rate must be finite and > 0 (got {0})")]
    BadFps(f64),
    #[error("timestamp of frame {index} is not strictly after the previous frame")]
    NonMonotonicTimestamps { index: usize },
    #[error("rect {rect:?} does not fit in a {width}x{height} frame")]
    RectOutOfBounds {
        rect: Rect,
        width: usize,
        height: usize,
    },
}

/// Linear radiometric calibration: `°C = slope * count + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    slope: f64,
    offset: f64,
}

impl Calibration {
    /// 0.01 °C per count, no offset. Covers 0 to 655.35 °C.
    pub const CENTIDEGREE: Calibration = Calibration {
        slope: 0.01,
        offset: 0.0,
    };

    pub fn new(slope: f64, offset: f64) -> Result<Self, ThermalError> {
        if !slope.is_finite() || slope <= 0.0 {
            return Err(ThermalError::BadSlope(slope));
        }
        if !offset.is_finite() {
            return Err(ThermalError::BadOffset(offset));
        }
        Ok(Self { slope, offset })
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn to_celsius(&self, count: u16) -> f64 {
        self.slope * f64::from(count) + self.offset
    }

    /// Nearest count for a temperature, clamped to the sensor range.
    #[inline]
    pub fn to_count(&self, celsius: f64) -> u16 {
        let c = ((celsius - self.offset) / self.slope).round();
        if c.is_nan() || c <= 0.0 {
            0
        } else if c >= f64::from(u16::MAX) {
            u16::MAX
        } else {
            c as u16
        }
    }
}

impl Default for Calibration {
    fn default() -> Self {
        Self::CENTIDEGREE
    }
}

/// Axis-aligned pixel rectangle, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> usize {
        self.x + self.w
    }

    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    /// Center in continuous pixel coordinates.
    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.w as f64 / 2.0,
            self.y as f64 + self.h as f64 / 2.0,
        )
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.w > 0 && self.h > 0 && self.right() <= width && self.bottom() <= height
    }

    pub fn contains(&self, px: usize, py: usize) -> bool {
        px >= self.x && px < self.right() && py >= self.y && py < self.bottom()
    }

    /// Shift by a signed offset; `None` if the result would leave the
    /// non-negative quadrant.
    pub fn offset_by(&self, dx: i64, dy: i64) -> Option<Rect> {
        let x = self.x as i64 + dx;
        let y = self.y as i64 + dy;
        if x < 0 || y < 0 {
            return None;
        }
        Some(Rect::new(x as usize, y as usize, self.w, self.h))
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 > x0 && y1 > y0).then(|| Rect::new(x0, y0, x1 - x0, y1 - y0))
    }

    /// Intersection over union.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection(other).map_or(0, |r| r.area());
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// One sensor readout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiometricFrame {
    width: usize,
    height: usize,
    counts: Vec<u16>,
    timestamp_us: u64,
}

impl RadiometricFrame {
    pub fn new(
        width: usize,
        height: usize,
        counts: Vec<u16>,
        timestamp_us: u64,
    ) -> Result<Self, ThermalError> {
        check_dims(width, height)?;
        if counts.len() != width * height {
            return Err(ThermalError::CountMismatch {
                index: 0,
                expected: width * height,
                actual: counts.len(),
            });
        }
        Ok(Self {
            width,
            height,
            counts,
            timestamp_us,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    pub fn timestamp_us(&self) -> u64 {
        self.timestamp_us
    }
}

fn check_dims(width: usize, height: usize) -> Result<(), ThermalError> {
    let max = usize::from(u16::MAX);
    if width == 0 || height == 0 || width > max || height > max {
        return Err(ThermalError::BadDimensions { width, height });
    }
    Ok(())
}

/// An ordered, calibrated sequence of equally sized frames.
///
/// The frame rate is held at millihertz precision, which is what the `.thrm`
/// container stores, so a clip always survives an encode/decode round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiometricClip {
    width: usize,
    height: usize,
    fps_milli: u32,
    calibration: Calibration,
    frames: Vec<RadiometricFrame>,
}

impl RadiometricClip {
    /// Builds a clip, rounding `fps` to the nearest 0.001 frames/s.
    pub fn new(
        width: usize,
        height: usize,
        fps: f64,
        calibration: Calibration,
        frames: Vec<RadiometricFrame>,
    ) -> Result<Self, ThermalError> {
        let fps_milli = fps_to_milli(fps)?;
        Self::from_parts(width, height, fps_milli, calibration, frames)
    }

    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        fps_milli: u32,
        calibration: Calibration,
        frames: Vec<RadiometricFrame>,
    ) -> Result<Self, ThermalError> {
        check_dims(width, height)?;
        if fps_milli == 0 {
            return Err(ThermalError::BadFps(0.0));
        }
        for (index, f) in frames.iter().enumerate() {
            if f.width != width || f.height != height {
                return Err(ThermalError::MixedDimensions {
                    index,
                    width: f.width,
                    height: f.height,
                    clip_width: width,
                    clip_height: height,
                });
            }
        }
        if let Some(index) = first_non_monotonic(frames.iter().map(|f| f.timestamp_us)) {
            return Err(ThermalError::NonMonotonicTimestamps { index });
        }
        Ok(Self {
            width,
            height,
            fps_milli,
            calibration,
            frames,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn fps(&self) -> f64 {
        f64::from(self.fps_milli) / 1000.0
    }

    pub fn fps_milli(&self) -> u32 {
        self.fps_milli
    }

    pub fn calibration(&self) -> Calibration {
        self.calibration
    }

    pub fn frames(&self) -> &[RadiometricFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Frame count divided by frame rate.
    pub fn duration_seconds(&self) -> f64 {
        self.frames.len() as f64 / self.fps()
    }

    /// Whether every timestamp is within half a frame period of its nominal
    /// position `i / fps`.
    pub fn is_uniform(&self) -> bool {
        let period_us = 1e6 / self.fps();
        self.frames.iter().enumerate().all(|(i, f)| {
            (f.timestamp_us as f64 - i as f64 * period_us).abs() <= period_us / 2.0
        })
    }

    pub fn celsius_frame(&self, index: usize) -> CelsiusFrame {
        calibrate(&self.frames[index], self.calibration)
    }

    /// The trailing `n` frames as a new clip with timestamps rebased to zero.
    pub fn tail(&self, n: usize) -> RadiometricClip {
        let start = self.frames.len().saturating_sub(n);
        let base = self.frames.get(start).map_or(0, |f| f.timestamp_us);
        let frames = self.frames[start..]
            .iter()
            .map(|f| RadiometricFrame {
                timestamp_us: f.timestamp_us - base,
                ..f.clone()
            })
            .collect();
        RadiometricClip {
            frames,
            ..self.without_frames()
        }
    }

    /// Global (min, max) temperature over all frames, `None` for an empty clip.
    pub fn temperature_range(&self) -> Option<(f64, f64)> {
        let (lo, hi) = self
            .frames
            .iter()
            .flat_map(|f| f.counts.iter().copied())
            .fold((u16::MAX, u16::MIN), |(lo, hi), c| (lo.min(c), hi.max(c)));
        (!self.frames.is_empty())
            .then(|| (self.calibration.to_celsius(lo), self.calibration.to_celsius(hi)))
    }

    fn without_frames(&self) -> RadiometricClip {
        RadiometricClip {
            width: self.width,
            height: self.height,
            fps_milli: self.fps_milli,
            calibration: self.calibration,
            frames: Vec::new(),
        }
    }
}

pub(crate) fn fps_to_milli(fps: f64) -> Result<u32, ThermalError> {
    let milli = (fps * 1000.0).round();
    if !fps.is_finite() || fps <= 0.0 || milli < 1.0 || milli > f64::from(u32::MAX) {
        return Err(ThermalError::BadFps(fps));
    }
    Ok(milli as u32)
}

pub(crate) fn first_non_monotonic(ts: impl Iterator<Item = u64>) -> Option<usize> {
    let mut prev: Option<u64> = None;
    for (i, t) in ts.enumerate() {
        if matches!(prev, Some(p) if t <= p) {
            return Some(i);
        }
        prev = Some(t);
    }
    None
}

/// A frame of temperatures in °C, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CelsiusFrame {
    width: usize,
    height: usize,
    temps: Vec<f64>,
}

impl CelsiusFrame {
    pub fn new(width: usize, height: usize, temps: Vec<f64>) -> Result<Self, ThermalError> {
        if width == 0 || height == 0 {
            return Err(ThermalError::BadDimensions { width, height });
        }
        if temps.len() != width * height {
            return Err(ThermalError::CountMismatch {
                index: 0,
                expected: width * height,
                actual: temps.len(),
            });
        }
        Ok(Self {
            width,
            height,
            temps,
        })
    }

    /// A frame filled with one temperature.
    pub fn uniform(width: usize, height: usize, celsius: f64) -> Self {
        Self {
            width,
            height,
            temps: vec![celsius; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn temps(&self) -> &[f64] {
        &self.temps
    }

    pub fn temps_mut(&mut self) -> &mut [f64] {
        &mut self.temps
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.temps[y * self.width + x]
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    /// Iterates the temperatures inside `r` row by row. `r` must fit.
    pub fn window(&self, r: Rect) -> impl Iterator<Item = f64> + '_ {
        (r.y..r.bottom()).flat_map(move |y| {
            let row = y * self.width;
            self.temps[row + r.x..row + r.right()].iter().copied()
        })
    }
}

/// Applies the calibration to every pixel.
pub fn calibrate(frame: &RadiometricFrame, cal: Calibration) -> CelsiusFrame {
    CelsiusFrame {
        width: frame.width,
        height: frame.height,
        temps: frame.counts.iter().map(|&c| cal.to_celsius(c)).collect(),
    }
}

/// Extracts the sub-window `r`.
pub fn crop(frame: &CelsiusFrame, r: Rect) -> Result<CelsiusFrame, ThermalError> {
    if !r.fits(frame.width, frame.height) {
        return Err(ThermalError::RectOutOfBounds {
            rect: r,
            width: frame.width,
            height: frame.height,
        });
    }
    Ok(CelsiusFrame {
        width: r.w,
        height: r.h,
        temps: frame.window(r).collect(),
    })
}

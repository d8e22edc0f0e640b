use serde::{Deserialize, Serialize};

use super::{RegionName, RoiError, RoiTrack};
use crate::thermal::{RadiometricClip, RadiometricFrame, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerParams {
    /// Largest per-frame displacement searched, px.
    pub search_radius: usize,
    /// Below this score the previous rect is held.
    pub coast_threshold: f64,
    /// Border added around the rect when cutting the template, px. A flat
    /// patch has no texture to correlate against; its surroundings do.
    pub context: usize,
}

impl Default for TrackerParams {
    fn default() -> Self {
        Self {
            search_radius: 8,
            coast_threshold: 0.4,
            context: 4,
        }
    }
}

/// Zero-normalised cross-correlation of two equally sized windows.
///
/// Two flat windows match perfectly; a flat window against a textured one
/// scores 0.
pub fn zncc(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    match (saa > 0.0, sbb > 0.0) {
        (false, false) => 1.0,
        (true, true) => sab / (saa * sbb).sqrt(),
        _ => 0.0,
    }
}

/// Template statistics in exact integer arithmetic over raw counts. ZNCC is
/// invariant to the affine count → °C map, so calibration is skipped.
struct Template {
    w: usize,
    h: usize,
    values: Vec<i64>,
    sum: i128,
    centered_sq: i128,
}

impl Template {
    fn cut(frame: &RadiometricFrame, r: Rect) -> Self {
        let values: Vec<i64> = window_counts(frame, r).collect();
        let n = values.len() as i128;
        let sum: i128 = values.iter().map(|&v| v as i128).sum();
        let sq: i128 = values.iter().map(|&v| (v * v) as i128).sum();
        Self {
            w: r.w,
            h: r.h,
            values,
            sum,
            centered_sq: n * sq - sum * sum,
        }
    }

    fn score(&self, frame: &RadiometricFrame, x: usize, y: usize) -> f64 {
        let n = self.values.len() as i128;
        let (mut s, mut sq, mut cross) = (0i128, 0i128, 0i128);
        let width = frame.width();
        let counts = frame.counts();
        let mut t = self.values.iter();
        for row in y..y + self.h {
            for &c in &counts[row * width + x..row * width + x + self.w] {
                let v = i128::from(c);
                s += v;
                sq += v * v;
                cross += v * i128::from(*t.next().unwrap());
            }
        }
        let centered_sq = n * sq - s * s;
        match (self.centered_sq > 0, centered_sq > 0) {
            (false, false) => 1.0,
            (true, true) => {
                let num = (n * cross - self.sum * s) as f64;
                num / ((self.centered_sq as f64) * (centered_sq as f64)).sqrt()
            }
            _ => 0.0,
        }
    }
}

fn window_counts(frame: &RadiometricFrame, r: Rect) -> impl Iterator<Item = i64> + '_ {
    let width = frame.width();
    (r.y..r.bottom()).flat_map(move |y| {
        frame.counts()[y * width + r.x..y * width + r.right()]
            .iter()
            .map(|&c| i64::from(c))
    })
}

/// Tracks `initial` through the clip with default parameters.
pub fn track(clip: &RadiometricClip, initial: Rect, name: RegionName) -> Result<RoiTrack, RoiError> {
    track_with(clip, initial, name, &TrackerParams::default())
}

/// Tracks `initial` through the clip by ZNCC against the frame-0 template.
///
/// Each frame searches `±search_radius` around the previous position. Equal
/// scores prefer staying put, then leftmost, then topmost. Scores under
/// `coast_threshold` hold the previous rect.
pub fn track_with(
    clip: &RadiometricClip,
    initial: Rect,
    name: RegionName,
    params: &TrackerParams,
) -> Result<RoiTrack, RoiError> {
    let (width, height) = (clip.width(), clip.height());
    if !initial.fits(width, height) {
        return Err(RoiError::OutOfBounds {
            rect: initial,
            width,
            height,
        });
    }
    let Some(first) = clip.frames().first() else {
        return Ok(RoiTrack {
            region: name,
            rects: Vec::new(),
            quality: Vec::new(),
        });
    };

    let ctx = params.context;
    let rx0 = initial.x.saturating_sub(ctx);
    let ry0 = initial.y.saturating_sub(ctx);
    let region = Rect::new(
        rx0,
        ry0,
        (initial.right() + ctx).min(width) - rx0,
        (initial.bottom() + ctx).min(height) - ry0,
    );
    let (ox, oy) = (initial.x - region.x, initial.y - region.y);
    let template = Template::cut(first, region);
    let radius = params.search_radius as i64;

    let mut rects = Vec::with_capacity(clip.len());
    let mut quality = Vec::with_capacity(clip.len());
    rects.push(initial);
    quality.push(1.0);
    let mut pos = (region.x as i64, region.y as i64);

    for frame in &clip.frames()[1..] {
        let fits = |x: i64, y: i64| {
            x >= 0 && y >= 0 && x as usize + region.w <= width && y as usize + region.h <= height
        };
        let mut best_pos = pos;
        let mut best = template.score(frame, pos.0 as usize, pos.1 as usize);
        for dx in -radius..=radius {
            for dy in -radius..=radius {
                let (x, y) = (pos.0 + dx, pos.1 + dy);
                if (dx, dy) == (0, 0) || !fits(x, y) {
                    continue;
                }
                let s = template.score(frame, x as usize, y as usize);
                if s > best {
                    best = s;
                    best_pos = (x, y);
                }
            }
        }
        let q = best.clamp(0.0, 1.0);
        if q >= params.coast_threshold {
            pos = best_pos;
        }
        rects.push(Rect::new(
            pos.0 as usize + ox,
            pos.1 as usize + oy,
            initial.w,
            initial.h,
        ));
        quality.push(q);
    }

    Ok(RoiTrack {
        region: name,
        rects,
        quality,
    })
}

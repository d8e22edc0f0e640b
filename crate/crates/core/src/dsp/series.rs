use super::{BreathSignal, DspError};
use crate::roi::RoiTrack;
use crate::thermal::RadiometricClip;

/// Mean calibrated temperature inside each tracked rect.
///
/// Counts are summed as integers before calibration, so the result does not
/// depend on pixel order.
pub fn roi_mean_series(clip: &RadiometricClip, track: &RoiTrack) -> Result<BreathSignal, DspError> {
    if track.rects.len() != clip.len() {
        return Err(DspError::TrackLength {
            track: track.rects.len(),
            frames: clip.len(),
        });
    }
    let cal = clip.calibration();
    let width = clip.width();
    let mut samples = Vec::with_capacity(clip.len());
    for (frame, r) in clip.frames().iter().zip(&track.rects) {
        if !r.fits(width, clip.height()) {
            return Err(DspError::EmptyRect(*r));
        }
        let counts = frame.counts();
        let sum: u64 = (r.y..r.bottom())
            .map(|y| {
                counts[y * width + r.x..y * width + r.right()]
                    .iter()
                    .map(|&c| u64::from(c))
                    .sum::<u64>()
            })
            .sum();
        let mean_count = sum as f64 / r.area() as f64;
        samples.push(cal.slope() * mean_count + cal.offset());
    }
    BreathSignal::new(samples, clip.fps(), 0.0)
}

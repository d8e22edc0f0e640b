//! Forehead and nostril regions: detection on thermal frames and tracking
//! through a clip.
//!
//! Detection needs no trained model. The face is the largest warm blob
//! after Otsu thresholding, the forehead is the hottest patch in the top of
//! the face, and the nostril (or the mask over it) is the patch in the lower
//! face whose temperature fluctuates most inside the breathing band.
//! Tracking is zero-normalised cross-correlation against the first frame.
//!
//! Every search breaks ties leftmost-then-topmost.

mod detect;
mod track;

pub use detect::{detect_face, detect_forehead, detect_nostril, otsu_threshold, NostrilProbe};
pub use track::{track, track_with, zncc, TrackerParams};

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::DspError;
use crate::thermal::Rect;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoiError {
    #[error("NoFaceFound: no warm region of at least {min_area} px")]
    NoFaceFound { min_area: usize },
    #[error("face box is {height} px tall; at least 6 px needed")]
    FaceTooSmall { height: usize },
    #[error("NoBreathingRegion: strongest breathing-band variance {variance:.3e} °C² is below the noise floor")]
    NoBreathingRegion { variance: f64 },
    #[error("probe needs {needed} frames, clip has {available}")]
    ProbeTooShort { needed: usize, available: usize },
    #[error("rect {rect:?} does not fit in a {width}x{height} frame")]
    OutOfBounds {
        rect: Rect,
        width: usize,
        height: usize,
    },
    #[error(transparent)]
    Dsp(#[from] DspError),
}

impl RoiError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            RoiError::NoFaceFound { .. } => "NO_FACE_FOUND",
            RoiError::FaceTooSmall { .. } => "FACE_TOO_SMALL",
            RoiError::NoBreathingRegion { .. } => "NO_BREATHING_REGION",
            RoiError::ProbeTooShort { .. } => "PROBE_TOO_SHORT",
            RoiError::OutOfBounds { .. } => "ROI_OUT_OF_BOUNDS",
            RoiError::Dsp(_) => "SIGNAL_ERROR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionName {
    Forehead,
    Nostril,
}

impl fmt::Display for RegionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionName::Forehead => "forehead",
            RegionName::Nostril => "nostril",
        })
    }
}

/// Per-frame rectangles for one region with their match quality in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiTrack {
    pub region: RegionName,
    pub rects: Vec<Rect>,
    pub quality: Vec<f64>,
}

impl RoiTrack {
    /// The same rect in every frame, quality 1.
    pub fn fixed(region: RegionName, rect: Rect, frames: usize) -> Self {
        Self {
            region,
            rects: vec![rect; frames],
            quality: vec![1.0; frames],
        }
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    /// Number of frames where the tracker held the previous rect.
    pub fn coasted_frames(&self, threshold: f64) -> usize {
        self.quality.iter().filter(|q| **q < threshold).count()
    }

    /// `frame,x,y,w,h,quality` with a header row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "frame,x,y,w,h,quality")?;
        for (i, (r, q)) in self.rects.iter().zip(&self.quality).enumerate() {
            writeln!(out, "{i},{},{},{},{},{q:.6}", r.x, r.y, r.w, r.h)?;
        }
        Ok(())
    }
}

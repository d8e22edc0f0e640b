//! Contactless respiration and fever screening from radiometric thermal
//! video.
//!
//! A clip of a (possibly masked) face is reduced to two numbers and a
//! decision: the forehead temperature, the breathing rate and pattern read
//! from temperature swings at the nostrils, and a pass/alert/inconclusive
//! verdict.
//!
//! ```no_run
//! use respiscreen::{codec, config::PipelineConfig, pipeline};
//!
//! let bytes = std::fs::read("clip.thrm").unwrap();
//! let clip = codec::decode_clip(&bytes).unwrap();
//! let analysis = pipeline::analyze(&clip, &PipelineConfig::default()).unwrap();
//! println!("{}", analysis.report.summary());
//! ```
//!
//! Module map:
//!
//! - [`thermal`] frames, clips, calibration, rects
//! - [`codec`] the `.thrm` container
//! - [`synth`] a deterministic scene simulator with ground truth
//! - [`roi`] face, forehead and nostril detection and tracking
//! - [`dsp`] breathing-signal filtering and frequency estimation
//! - [`respiration`] rate fusion and pattern classification
//! - [`screening`] body temperature and the decision rules
//! - [`pipeline`], [`config`], [`plot`], [`cli`] wiring

pub mod cli;
pub mod codec;
pub mod config;
pub mod dsp;
pub mod pipeline;
pub mod plot;
pub mod respiration;
pub mod rng;
pub mod roi;
pub mod screening;
pub mod synth;
pub mod thermal;

use thiserror::Error;

pub use config::PipelineConfig;
pub use pipeline::{analyze, Analysis};
pub use screening::{Decision, ScreeningReport};
pub use thermal::{Calibration, RadiometricClip, RadiometricFrame, Rect};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Codec(#[from] codec::CodecError),
    #[error(transparent)]
    Scenario(#[from] synth::ScenarioError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Pipeline(#[from] pipeline::PipelineError),
}

impl Error {
    /// Stable machine-readable code for messages.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io(_) => "IO",
            Error::Json(_) => "JSON",
            Error::Codec(_) => "DECODE",
            Error::Scenario(_) => "INVALID_SCENARIO",
            Error::Config(_) => "INVALID_CONFIG",
            Error::Pipeline(e) => e.code(),
        }
    }
}

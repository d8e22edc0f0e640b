//! Write the three-panel SVG and its CSV sidecars for a simulated clip.
//!
//!     cargo run --example plot_report -- [out.svg]

use std::path::PathBuf;

use respiscreen::pipeline::analyze;
use respiscreen::plot::write_report;
use respiscreen::synth::{render, Scenario};
use respiscreen::PipelineConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let svg = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("plot_report.svg"));
    let (clip, _) = render(&Scenario {
        breath_rate: 11.0,
        waveform_asymmetry: 0.35,
        noise_sigma: 0.04,
        drift: 0.05,
        seed: 5,
        ..Scenario::default()
    })?;
    let cfg = PipelineConfig::default();
    let a = analyze(&clip, &cfg)?;
    for path in write_report(&a, cfg.band_high_hz, &svg)? {
        println!("wrote {}", path.display());
    }
    println!("{}", a.report.summary());
    Ok(())
}

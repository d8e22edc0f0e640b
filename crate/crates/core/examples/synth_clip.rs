//! Render a simulated recording and save it with its ground truth.
//!
//!     cargo run --example synth_clip -- [out.thrm]

use respiscreen::codec::encode_clip;
use respiscreen::synth::{render, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("synth_clip.thrm").display().to_string());

    let scenario = Scenario {
        breath_rate: 18.0,
        waveform_asymmetry: 0.4,
        noise_sigma: 0.03,
        sway_amplitude: 2.0,
        seed: 11,
        ..Scenario::default()
    };
    let (clip, truth) = render(&scenario)?;
    std::fs::write(&out, encode_clip(&clip))?;

    println!("{} frames of {}x{} at {} fps -> {out}", clip.len(), clip.width(), clip.height(), clip.fps());
    println!("truth: {} at {} breaths/min", truth.true_pattern, truth.true_rate);
    println!("nostril patch in frame 0: {:?}", truth.nostril_rects[0]);
    let (lo, hi) = clip.temperature_range().unwrap();
    println!("temperatures {lo:.2}..{hi:.2} °C");
    Ok(())
}

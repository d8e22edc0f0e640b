//! Full screening of a clip file, or of a freshly simulated febrile subject
//! when no path is given.
//!
//!     cargo run --release --example end_to_end_analyze -- [clip.thrm] [config.json]

use std::path::Path;
use std::time::Instant;

use respiscreen::codec::decode_clip;
use respiscreen::synth::{render, Scenario};
use respiscreen::{analyze, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let clip = match args.next() {
        Some(path) => decode_clip(&std::fs::read(path)?)?,
        None => {
            render(&Scenario {
                duration: 25.0,
                forehead_temp: 37.9,
                breath_rate: 22.0,
                noise_sigma: 0.05,
                drift: 0.03,
                sway_amplitude: 2.0,
                seed: 3,
                ..Scenario::default()
            })?
            .0
        }
    };
    let cfg = PipelineConfig::resolve(args.next().as_deref().map(Path::new))?;

    let start = Instant::now();
    let a = analyze(&clip, &cfg)?;
    let elapsed = start.elapsed();

    println!("analysed the last {} frames in {:.0} ms", a.frames, elapsed.as_secs_f64() * 1e3);
    println!("face {:?}", a.face);
    println!("forehead {:?}, nostril {:?}", a.forehead.rects[0], a.nostril.rects[0]);
    println!(
        "rate: spectral {:.2}, peaks {:.2}, snr {:.1}",
        a.respiration.rate_spectral, a.respiration.rate_timedomain, a.respiration.snr
    );
    println!("{}", a.report.summary());
    println!("{}", a.report.to_json());
    std::process::exit(a.report.decision.exit_code());
}

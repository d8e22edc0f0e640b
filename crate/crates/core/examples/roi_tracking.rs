//! Detect the face, forehead and nostril regions on a swaying subject and
//! track them, comparing against the simulator's rects.

use respiscreen::roi::{detect_face, detect_forehead, detect_nostril, track, NostrilProbe, RegionName};
use respiscreen::synth::{render, Scenario};
use respiscreen::thermal::calibrate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (clip, truth) = render(&Scenario {
        sway_amplitude: 3.0,
        sway_period: 5.0,
        noise_sigma: 0.03,
        seed: 2,
        ..Scenario::default()
    })?;

    let first = calibrate(&clip.frames()[0], clip.calibration());
    let face = detect_face(&first)?;
    let forehead = detect_forehead(&first, face)?;
    let nostril = detect_nostril(&clip, face, &NostrilProbe::default())?;
    println!("face {face:?}\nforehead {forehead:?}\nnostril {nostril:?}");

    let tracked = track(&clip, nostril, RegionName::Nostril)?;
    let mut worst = 0i64;
    for (got, want) in tracked.rects.iter().zip(&truth.nostril_rects) {
        worst = worst.max((got.x as i64 - want.x as i64).abs() + (got.y as i64 - want.y as i64).abs());
    }
    println!(
        "tracked {} frames, worst offset from truth {worst} px, {} coasted",
        tracked.len(),
        tracked.coasted_frames(0.4)
    );
    let mut csv = Vec::new();
    tracked.write_csv(&mut csv)?;
    for line in String::from_utf8(csv)?.lines().take(6) {
        println!("{line}");
    }
    Ok(())
}

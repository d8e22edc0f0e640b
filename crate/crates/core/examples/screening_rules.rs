//! The decision table: temperature and respiration in, verdict and reasons
//! out.

use respiscreen::respiration::{BreathingPattern, RespirationEstimate};
use respiscreen::screening::{screen, ScreeningRules, TemperatureEstimate};

fn main() {
    let rules = ScreeningRules::default();
    let cases = [
        (36.6, 15.0, BreathingPattern::Eupnea, 0.9),
        (37.8, 15.0, BreathingPattern::Eupnea, 0.9),
        (36.6, 0.0, BreathingPattern::Apnea, 0.9),
        (36.6, 34.0, BreathingPattern::Tachypnea, 0.8),
        (36.6, 16.0, BreathingPattern::Eupnea, 0.1),
        (21.0, 16.0, BreathingPattern::Eupnea, 0.9),
    ];
    for (temp, rate, pattern, confidence) in cases {
        let report = screen(
            &TemperatureEstimate::from_value(temp),
            &RespirationEstimate::new(rate, pattern, confidence),
            &rules,
            15.0,
        );
        println!("exit {}  {}", report.decision.exit_code(), report.summary());
    }

    let lenient = ScreeningRules {
        skin_to_core_offset: 0.8,
        ..rules
    };
    let r = screen(
        &TemperatureEstimate::from_value(36.6),
        &RespirationEstimate::new(15.0, BreathingPattern::Eupnea, 0.9),
        &lenient,
        15.0,
    );
    println!("\nwith +0.8 °C skin-to-core offset:\n{}", r.to_json());
}

use std::path::{Path, PathBuf};

use respiscreen::cli::{cmd_analyze, cmd_inspect, cmd_plot, cmd_synth, GlobalOpts};
use respiscreen::codec::encode_clip;
use respiscreen::plot::{spectrum_axis_max_bpm, x_to_bpm};
use respiscreen::synth::{render, Scenario};
use respiscreen::thermal::{Calibration, RadiometricClip, RadiometricFrame};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn call(f: fn(&Path, &GlobalOpts, &mut dyn std::io::Write, &mut dyn std::io::Write) -> i32, path: &Path, opts: &GlobalOpts) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = f(path, opts, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write_clip(dir: &TempDir, name: &str, s: &Scenario) -> PathBuf {
    let (clip, _) = render(s).unwrap();
    let path = dir.path().join(name);
    std::fs::write(&path, encode_clip(&clip)).unwrap();
    path
}

fn report(stdout: &str) -> serde_json::Value {
    serde_json::from_str(stdout).unwrap()
}

#[test]
fn synth_writes_clip_and_truth() {
    let dir = TempDir::new().unwrap();
    let scenario = dir.path().join("s.json");
    std::fs::write(&scenario, r#"{"breath_rate": 18, "seed": 4}"#).unwrap();
    let r = call(cmd_synth, &scenario, &GlobalOpts::default());
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(dir.path().join("s.thrm").exists());
    let truth: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.truth.json")).unwrap()).unwrap();
    assert_eq!(truth["true_rate"], 18.0);
    assert_eq!(truth["true_pattern"], "Eupnea");
    assert_eq!(truth["nostril_rects"].as_array().unwrap().len(), 130);

    let first = std::fs::read(dir.path().join("s.thrm")).unwrap();
    let out = dir.path().join("again.thrm");
    let r = call(cmd_synth, &scenario, &GlobalOpts { out: Some(out.clone()), ..Default::default() });
    assert_eq!(r.code, 0);
    assert_eq!(std::fs::read(out).unwrap(), first);
}

#[test]
fn synth_names_the_bad_field() {
    let dir = TempDir::new().unwrap();
    let scenario = dir.path().join("s.json");
    std::fs::write(&scenario, r#"{"duration": 0}"#).unwrap();
    let r = call(cmd_synth, &scenario, &GlobalOpts::default());
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("duration"), "{}", r.stderr);
    assert!(!dir.path().join("s.thrm").exists());
}

#[test]
fn analyze_exit_codes_follow_the_decision() {
    let dir = TempDir::new().unwrap();
    let healthy = write_clip(&dir, "healthy.thrm", &Scenario::default());
    let r = call(cmd_analyze, &healthy, &GlobalOpts::default());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = report(&r.stdout);
    assert_eq!(v["pattern"], "Eupnea");
    assert_eq!(v["decision"], "Pass");
    assert!((v["rate_bpm"].as_f64().unwrap() - 15.0).abs() < 0.6);

    let fever = write_clip(&dir, "fever.thrm", &Scenario { forehead_temp: 38.0, ..Scenario::default() });
    let r = call(cmd_analyze, &fever, &GlobalOpts::default());
    assert_eq!(r.code, 2);
    assert_eq!(report(&r.stdout)["reasons"], serde_json::json!(["FEVER"]));

    let apnea = write_clip(
        &dir,
        "apnea.thrm",
        &Scenario {
            noise_sigma: 0.05,
            apnea_windows: vec![[0.0, 15.0]],
            ..Scenario::default()
        },
    );
    let r = call(cmd_analyze, &apnea, &GlobalOpts::default());
    assert_eq!(r.code, 2);
    let v = report(&r.stdout);
    assert_eq!(v["pattern"], "Apnea");
    assert_eq!(v["rate_bpm"], 0.0);
}

#[test]
fn report_keys_are_fixed() {
    let dir = TempDir::new().unwrap();
    let clip = write_clip(&dir, "c.thrm", &Scenario::default());
    let out = dir.path().join("report.json");
    let r = call(cmd_analyze, &clip, &GlobalOpts { out: Some(out.clone()), ..Default::default() });
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        ["body_temp_c", "confidence", "decision", "pattern", "rate_bpm", "reasons", "window_seconds"]
    );
}

#[test]
fn analyze_errors_exit_one_with_a_code() {
    let dir = TempDir::new().unwrap();
    let clip = write_clip(&dir, "c.thrm", &Scenario::default());
    let bytes = std::fs::read(&clip).unwrap();
    let truncated = dir.path().join("t.thrm");
    std::fs::write(&truncated, &bytes[..bytes.len() - 7]).unwrap();
    let r = call(cmd_analyze, &truncated, &GlobalOpts::default());
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("truncated"), "{}", r.stderr);

    let blank = write_clip(
        &dir,
        "blank.thrm",
        &Scenario {
            face_temp: 24.0,
            forehead_temp: 24.0,
            nostril_baseline: 24.0,
            breath_amplitude: 0.0,
            ..Scenario::default()
        },
    );
    let r = call(cmd_analyze, &blank, &GlobalOpts::default());
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("NO_FACE_FOUND"), "{}", r.stderr);

    let still = write_clip(&dir, "still.thrm", &Scenario { breath_amplitude: 0.0, ..Scenario::default() });
    let r = call(cmd_analyze, &still, &GlobalOpts::default());
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("NO_BREATHING_REGION"), "{}", r.stderr);

    let r = call(cmd_analyze, &dir.path().join("missing.thrm"), &GlobalOpts::default());
    assert_eq!(r.code, 1);
}

#[test]
fn config_file_changes_the_verdict() {
    let dir = TempDir::new().unwrap();
    let clip = write_clip(&dir, "c.thrm", &Scenario { forehead_temp: 37.0, ..Scenario::default() });
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"skin_to_core_offset": 0.5}"#).unwrap();
    let r = call(cmd_analyze, &clip, &GlobalOpts { config: Some(cfg), ..Default::default() });
    assert_eq!(r.code, 2);
    assert_eq!(report(&r.stdout)["reasons"], serde_json::json!(["FEVER"]));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"window_seconds": 5}"#).unwrap();
    let r = call(cmd_analyze, &clip, &GlobalOpts { config: Some(bad), ..Default::default() });
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("window_seconds"));
}

fn panels(svg: &str) -> Vec<String> {
    let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
    doc.descendants()
        .filter(|n| n.attribute("class") == Some("panel"))
        .map(|n| n.attribute("id").unwrap().to_string())
        .collect()
}

#[test]
fn plot_marks_the_breathing_rate() {
    let dir = TempDir::new().unwrap();
    let clip = write_clip(&dir, "c.thrm", &Scenario::default());
    let r = call(cmd_plot, &clip, &GlobalOpts::default());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let svg = std::fs::read_to_string(dir.path().join("c.svg")).unwrap();
    assert_eq!(panels(&svg), ["raw", "filtered", "spectrum"]);

    let doc = roxmltree::Document::parse(&svg).unwrap();
    let marker = doc
        .descendants()
        .find(|n| n.attribute("class") == Some("peak-marker"))
        .unwrap();
    let line = marker.children().find(|n| n.has_tag_name("line")).unwrap();
    let x: f64 = line.attribute("x1").unwrap().parse().unwrap();
    let bpm = x_to_bpm(x, spectrum_axis_max_bpm(0.85));
    assert!((bpm - 15.0).abs() < 1.0, "{bpm}");

    for suffix in ["raw.csv", "filtered.csv", "spectrum.csv", "forehead.csv", "nostril.csv"] {
        let p = dir.path().join(format!("c.{suffix}"));
        assert!(p.exists(), "{suffix}");
    }
    let raw = std::fs::read_to_string(dir.path().join("c.raw.csv")).unwrap();
    assert!(raw.starts_with("t,value\n"));
    assert_eq!(raw.lines().count(), 131);
    let spec = std::fs::read_to_string(dir.path().join("c.spectrum.csv")).unwrap();
    assert!(spec.starts_with("freq,power\n"));
}

#[test]
fn plot_of_a_constant_clip_is_flat() {
    let dir = TempDir::new().unwrap();
    let frames = (0..130)
        .map(|i| RadiometricFrame::new(32, 24, vec![3000; 32 * 24], i * 114_943).unwrap())
        .collect();
    let clip = RadiometricClip::new(32, 24, 8.7, Calibration::default(), frames).unwrap();
    let path = dir.path().join("flat.thrm");
    std::fs::write(&path, encode_clip(&clip)).unwrap();
    let svg_path = dir.path().join("flat.svg");
    let r = call(cmd_plot, &path, &GlobalOpts { out: Some(svg_path.clone()), ..Default::default() });
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("warning"));
    let svg = std::fs::read_to_string(svg_path).unwrap();
    assert_eq!(panels(&svg).len(), 3);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let marker = doc
        .descendants()
        .find(|n| n.attribute("class") == Some("peak-marker"))
        .unwrap();
    assert!(!marker.has_children());
    for trace in doc.descendants().filter(|n| n.attribute("class") == Some("trace")) {
        let ys: Vec<&str> = trace
            .attribute("points")
            .unwrap()
            .split(' ')
            .filter(|p| !p.is_empty())
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn inspect_reports_header_and_range() {
    let dir = TempDir::new().unwrap();
    let clip = write_clip(&dir, "c.thrm", &Scenario::default());
    let r = call(cmd_inspect, &clip, &GlobalOpts::default());
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("14.94 s"), "{}", r.stdout);
    assert!(r.stdout.contains("frames      130"));
    assert!(r.stdout.contains("24.00 °C"));
    assert!(r.stdout.contains("36.60 °C"));

    let r = call(cmd_inspect, &clip, &GlobalOpts { json: true, ..Default::default() });
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["frame_count"], 130);
    assert_eq!(v["fps"], 8.7);
}

#[test]
fn inspect_handles_empty_and_bad_files() {
    let dir = TempDir::new().unwrap();
    let empty = RadiometricClip::new(4, 3, 8.7, Calibration::default(), Vec::new()).unwrap();
    let path = dir.path().join("empty.thrm");
    std::fs::write(&path, encode_clip(&empty)).unwrap();
    let r = call(cmd_inspect, &path, &GlobalOpts::default());
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("frames      0"));

    let mut bytes = encode_clip(&empty);
    bytes[..4].copy_from_slice(b"JUNK");
    let bad = dir.path().join("bad.thrm");
    std::fs::write(&bad, bytes).unwrap();
    let r = call(cmd_inspect, &bad, &GlobalOpts::default());
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("magic"));

    let r = call(cmd_analyze, &path, &GlobalOpts::default());
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("EMPTY_CLIP"));
}

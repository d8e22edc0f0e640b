//! Command implementations behind the `respiscreen` binary.
//!
//! Each command writes to the given streams and returns its exit code:
//! 0 success (or Pass), 1 any error, 2 Alert, 3 Inconclusive.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::codec::{decode_clip, decode_header, encode_clip, EXTENSION, MAGIC};
use crate::config::PipelineConfig;
use crate::pipeline::{analyze, analyze_lenient};
use crate::plot::write_report;
use crate::synth::{render, Scenario};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;

/// Flags shared by every command.
#[derive(Debug, Clone, Default)]
pub struct GlobalOpts {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub json: bool,
}

fn report_error(err: &Error, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "error[{}]: {err}", err.code());
    EXIT_ERROR
}

fn finish(result: Result<i32, Error>, stderr: &mut dyn Write) -> i32 {
    result.unwrap_or_else(|e| report_error(&e, stderr))
}

fn read_clip(path: &Path) -> Result<crate::RadiometricClip, Error> {
    Ok(decode_clip(&std::fs::read(path)?)?)
}

/// `<path without extension>.<suffix>`
fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Renders a scenario to `<out>.thrm` and `<out>.truth.json`. Without
/// `--out` the clip lands next to the scenario file.
pub fn cmd_synth(scenario: &Path, opts: &GlobalOpts, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let mut run = || -> Result<i32, Error> {
        let s = Scenario::from_json(&std::fs::read_to_string(scenario)?)?;
        let (clip, truth) = render(&s)?;
        let out = opts.out.clone().unwrap_or_else(|| with_suffix(scenario, EXTENSION));
        let truth_path = with_suffix(&out, "truth.json");
        std::fs::write(&out, encode_clip(&clip))?;
        std::fs::write(&truth_path, serde_json::to_string_pretty(&truth)? + "\n")?;
        writeln!(
            stdout,
            "wrote {} ({} frames {}x{} @ {} fps, {} {:.1} bpm) and {}",
            out.display(),
            clip.len(),
            clip.width(),
            clip.height(),
            clip.fps(),
            truth.true_pattern,
            truth.true_rate,
            truth_path.display()
        )?;
        Ok(EXIT_OK)
    };
    finish(run(), stderr)
}

/// Screens the trailing window of a clip. The JSON report goes to stdout or
/// `--out`; the one-line summary to stderr. Exit code follows the decision.
pub fn cmd_analyze(clip_path: &Path, opts: &GlobalOpts, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let mut run = |stderr: &mut dyn Write| -> Result<i32, Error> {
        let cfg = PipelineConfig::resolve(opts.config.as_deref())?;
        let clip = read_clip(clip_path)?;
        if !clip.is_uniform() {
            writeln!(stderr, "warning: frame timestamps are not evenly spaced; analysis assumes the nominal fps")?;
        }
        let analysis = analyze(&clip, &cfg)?;
        let report = &analysis.report;
        let json = report.to_json() + "\n";
        match &opts.out {
            Some(p) => std::fs::write(p, &json)?,
            None => stdout.write_all(json.as_bytes())?,
        }
        writeln!(stderr, "{}", report.summary())?;
        Ok(report.decision.exit_code())
    };
    let result = run(stderr);
    finish(result, stderr)
}

/// Writes the three-panel SVG and CSV sidecars. Detection failures fall
/// back to default regions so that problem clips can still be looked at.
pub fn cmd_plot(clip_path: &Path, opts: &GlobalOpts, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let mut run = |stderr: &mut dyn Write| -> Result<i32, Error> {
        let cfg = PipelineConfig::resolve(opts.config.as_deref())?;
        let clip = read_clip(clip_path)?;
        let analysis = analyze_lenient(&clip, &cfg)?;
        for step in &analysis.fallbacks {
            writeln!(stderr, "warning: {step} detection failed; plotting a default region")?;
        }
        let svg = opts.out.clone().unwrap_or_else(|| with_suffix(clip_path, "svg"));
        for p in write_report(&analysis, cfg.band_high_hz, &svg)? {
            writeln!(stdout, "wrote {}", p.display())?;
        }
        Ok(EXIT_OK)
    };
    let result = run(stderr);
    finish(result, stderr)
}

#[derive(Debug, Serialize)]
struct InspectJson {
    magic: String,
    version: u16,
    width: u16,
    height: u16,
    frame_count: u32,
    fps: f64,
    cal_slope: f64,
    cal_offset: f64,
    duration_s: f64,
    min_temp_c: Option<f64>,
    max_temp_c: Option<f64>,
}

/// Header fields, duration and temperature range.
pub fn cmd_inspect(clip_path: &Path, opts: &GlobalOpts, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let mut run = || -> Result<i32, Error> {
        let bytes = std::fs::read(clip_path)?;
        let header = decode_header(&bytes)?;
        let clip = decode_clip(&bytes)?;
        let range = clip.temperature_range();
        let duration = if clip.is_empty() { 0.0 } else { clip.duration_seconds() };
        let text = if opts.json {
            let info = InspectJson {
                magic: String::from_utf8_lossy(&MAGIC).into_owned(),
                version: header.version,
                width: header.width,
                height: header.height,
                frame_count: header.frame_count,
                fps: clip.fps(),
                cal_slope: header.cal_slope,
                cal_offset: header.cal_offset,
                duration_s: duration,
                min_temp_c: range.map(|r| r.0),
                max_temp_c: range.map(|r| r.1),
            };
            serde_json::to_string_pretty(&info)? + "\n"
        } else {
            let temp = |v: Option<f64>| v.map_or("n/a".to_string(), |t| format!("{t:.2} °C"));
            format!(
                "file        {}\nversion     {}\nsize        {}x{}\nframes      {}\nfps         {:.3}\ncalibration {} * count + {}\nduration    {duration:.2} s\nmin temp    {}\nmax temp    {}\n",
                clip_path.display(),
                header.version,
                header.width,
                header.height,
                header.frame_count,
                clip.fps(),
                header.cal_slope,
                header.cal_offset,
                temp(range.map(|r| r.0)),
                temp(range.map(|r| r.1)),
            )
        };
        match &opts.out {
            Some(p) => std::fs::write(p, text)?,
            None => stdout.write_all(text.as_bytes())?,
        }
        Ok(EXIT_OK)
    };
    finish(run(), stderr)
}

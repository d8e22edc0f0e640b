//! SVG report of an analysis plus CSV sidecars.
//!
//! Output is a pure function of the analysis: fixed layout, fixed number
//! formatting, no timestamps.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::dsp::{BreathSignal, Spectrum};
use crate::pipeline::Analysis;

const WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 200.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 30.0;

/// Horizontal plot extent shared by all panels, px.
pub const PLOT_X0: f64 = MARGIN_LEFT;
pub const PLOT_X1: f64 = WIDTH - MARGIN_RIGHT;

struct Panel {
    id: &'static str,
    title: String,
    x_label: &'static str,
    y_label: &'static str,
    x_range: (f64, f64),
    points: Vec<(f64, f64)>,
}

/// Upper end of the spectrum axis: the band edge rounded up to 10 bpm.
pub fn spectrum_axis_max_bpm(band_high_hz: f64) -> f64 {
    ((band_high_hz * 60.0 / 10.0).ceil() * 10.0).max(10.0)
}

/// Pixel x of `bpm` on the spectrum axis.
pub fn bpm_to_x(bpm: f64, axis_max: f64) -> f64 {
    PLOT_X0 + (PLOT_X1 - PLOT_X0) * bpm / axis_max
}

/// Inverse of [`bpm_to_x`].
pub fn x_to_bpm(x: f64, axis_max: f64) -> f64 {
    (x - PLOT_X0) / (PLOT_X1 - PLOT_X0) * axis_max
}

fn series_points(sig: &BreathSignal) -> Vec<(f64, f64)> {
    sig.samples()
        .iter()
        .enumerate()
        .map(|(i, v)| (sig.time_at(i) - sig.t0(), *v))
        .collect()
}

fn time_range(sig: &BreathSignal) -> (f64, f64) {
    (0.0, sig.duration().max(f64::MIN_POSITIVE))
}

/// Three stacked panels: raw nostril series, filtered series, spectrum.
pub fn render_svg(a: &Analysis, band_high_hz: f64) -> String {
    let axis_max = spectrum_axis_max_bpm(band_high_hz);
    let f_max = axis_max / 60.0;
    let spectrum: Vec<(f64, f64)> = a
        .spectrum
        .freqs
        .iter()
        .zip(&a.spectrum.power)
        .filter(|(f, _)| **f <= f_max)
        .map(|(f, p)| (f * 60.0, *p))
        .collect();
    let panels = [
        Panel {
            id: "raw",
            title: "Nostril ROI mean".into(),
            x_label: "time (s)",
            y_label: "°C",
            x_range: time_range(&a.raw),
            points: series_points(&a.raw),
        },
        Panel {
            id: "filtered",
            title: "Detrended, band-passed".into(),
            x_label: "time (s)",
            y_label: "°C",
            x_range: time_range(&a.filtered),
            points: series_points(&a.filtered),
        },
        Panel {
            id: "spectrum",
            title: format!(
                "Power spectrum: {} {:.1} bpm",
                a.respiration.pattern, a.respiration.rate
            ),
            x_label: "rate (breaths/min)",
            y_label: "power",
            x_range: (0.0, axis_max),
            points: spectrum,
        },
    ];

    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{height}" fill="white"/>"#);
    for (k, p) in panels.iter().enumerate() {
        let top = k as f64 * PANEL_HEIGHT;
        let marker = (p.id == "spectrum").then(|| peak_marker(&a.spectrum, a.respiration.rate_spectral, axis_max, top));
        panel(&mut s, p, top, marker.as_deref());
    }
    s.push_str("</svg>\n");
    s
}

fn panel(s: &mut String, p: &Panel, top: f64, extra: Option<&str>) {
    let (y0, y1) = (top + MARGIN_TOP, top + PANEL_HEIGHT - MARGIN_BOTTOM);
    let (lo, hi) = p
        .points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(*v), hi.max(*v)));
    let _ = writeln!(
        s,
        r#"<g class="panel" id="{}" data-x-min="{:.3}" data-x-max="{:.3}">"#,
        p.id, p.x_range.0, p.x_range.1
    );
    let _ = writeln!(s, r#"<text x="{PLOT_X0}" y="{:.1}" font-weight="bold">{}</text>"#, top + 18.0, p.title);
    let _ = writeln!(
        s,
        r##"<rect x="{PLOT_X0}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#888"/>"##,
        PLOT_X1 - PLOT_X0,
        y1 - y0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (PLOT_X0 + PLOT_X1) / 2.0,
        y1 + 22.0,
        p.x_label
    );
    let _ = writeln!(s, r#"<text x="4" y="{:.1}">{}</text>"#, (y0 + y1) / 2.0, p.y_label);
    for (x, label) in [(PLOT_X0, p.x_range.0), (PLOT_X1, p.x_range.1)] {
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{label:.0}</text>"#, y1 + 12.0);
    }
    if lo.is_finite() {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{hi:.3}</text>"#, PLOT_X0 - 4.0, y0 + 4.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{y1:.1}" text-anchor="end">{lo:.3}</text>"#, PLOT_X0 - 4.0);
    }

    let span = p.x_range.1 - p.x_range.0;
    let mut pts = String::new();
    for (x, v) in &p.points {
        let px = PLOT_X0 + (PLOT_X1 - PLOT_X0) * (x - p.x_range.0) / span;
        // flat traces sit mid-panel
        let frac = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
        let py = y1 - (y1 - y0) * frac;
        if !pts.is_empty() {
            pts.push(' ');
        }
        let _ = write!(pts, "{px:.2},{py:.2}");
    }
    let _ = writeln!(s, r##"<polyline class="trace" fill="none" stroke="#1f4e99" stroke-width="1.2" points="{pts}"/>"##);
    if let Some(e) = extra {
        s.push_str(e);
    }
    s.push_str("</g>\n");
}

/// Vertical marker at the spectral rate; an empty group when the spectrum
/// has no power.
fn peak_marker(spec: &Spectrum, rate_spectral: f64, axis_max: f64, top: f64) -> String {
    if spec.power.iter().all(|p| *p == 0.0) || !rate_spectral.is_finite() {
        return "<g class=\"peak-marker\"></g>\n".into();
    }
    let x = bpm_to_x(rate_spectral.clamp(0.0, axis_max), axis_max);
    let (y0, y1) = (top + MARGIN_TOP, top + PANEL_HEIGHT - MARGIN_BOTTOM);
    format!(
        "<g class=\"peak-marker\" data-bpm=\"{rate_spectral:.3}\">\n\
         <line x1=\"{x:.2}\" y1=\"{y0:.1}\" x2=\"{x:.2}\" y2=\"{y1:.1}\" stroke=\"#c0392b\" stroke-dasharray=\"4 3\"/>\n\
         <text x=\"{:.2}\" y=\"{:.1}\" fill=\"#c0392b\">{rate_spectral:.1} bpm</text>\n\
         </g>\n",
        x + 4.0,
        y0 + 14.0
    )
}

/// `t,value` rows, time relative to the first sample.
pub fn write_series_csv<W: Write>(sig: &BreathSignal, mut out: W) -> io::Result<()> {
    writeln!(out, "t,value")?;
    for (t, v) in series_points(sig) {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(spec: &Spectrum, mut out: W) -> io::Result<()> {
    writeln!(out, "freq,power")?;
    for (f, p) in spec.freqs.iter().zip(&spec.power) {
        writeln!(out, "{f},{p}")?;
    }
    Ok(())
}

/// `<stem>.<suffix>` next to `svg`.
pub fn sidecar_path(svg: &Path, suffix: &str) -> PathBuf {
    let stem = svg.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    svg.with_file_name(format!("{stem}.{suffix}"))
}

/// Writes the SVG and its sidecars; returns every path written.
pub fn write_report(a: &Analysis, band_high_hz: f64, svg: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::write(svg, render_svg(a, band_high_hz))?;
    let mut written = vec![svg.to_owned()];
    let mut emit = |suffix: &str, f: &dyn Fn(&mut BufWriter<File>) -> io::Result<()>| -> io::Result<()> {
        let path = sidecar_path(svg, suffix);
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        written.push(path);
        Ok(())
    };
    emit("raw.csv", &|w| write_series_csv(&a.raw, w))?;
    emit("filtered.csv", &|w| write_series_csv(&a.filtered, w))?;
    emit("spectrum.csv", &|w| write_spectrum_csv(&a.spectrum, w))?;
    emit("forehead.csv", &|w| a.forehead.write_csv(w))?;
    emit("nostril.csv", &|w| a.nostril.write_csv(w))?;
    Ok(written)
}

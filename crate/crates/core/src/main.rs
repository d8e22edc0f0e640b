use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use respiscreen::cli::{cmd_analyze, cmd_inspect, cmd_plot, cmd_synth, GlobalOpts};

/// Thermal-video respiration and fever screening.
///
/// Exit codes: 0 success or Pass, 1 error, 2 Alert, 3 Inconclusive.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    /// Pipeline config JSON (falls back to $RESPISCREEN_CONFIG, then defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path for the command's main artifact.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Machine-readable output where supported.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scenario JSON to a .thrm clip and a .truth.json oracle.
    Synth { scenario: PathBuf },
    /// Screen the trailing window of a clip and print the report JSON.
    Analyze { clip: PathBuf },
    /// Write an SVG of the breathing signal and spectrum, plus CSV sidecars.
    Plot { clip: PathBuf },
    /// Print a clip's header, duration and temperature range.
    Inspect { clip: PathBuf },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = GlobalOpts {
        config: args.config,
        out: args.out,
        json: args.json,
    };
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match &args.command {
        Command::Synth { scenario } => cmd_synth(scenario, &opts, &mut out, &mut err),
        Command::Analyze { clip } => cmd_analyze(clip, &opts, &mut out, &mut err),
        Command::Plot { clip } => cmd_plot(clip, &opts, &mut out, &mut err),
        Command::Inspect { clip } => cmd_inspect(clip, &opts, &mut out, &mut err),
    };
    ExitCode::from(code as u8)
}

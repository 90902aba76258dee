use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use vrgaze::commands::{self, RunConfig};
use vrgaze::data::TraceFormat;
use vrgaze::predict::TileGrid;
use vrgaze::taxonomy::Cuts;

/// 360° video taxonomy, head/gaze analytics and gaze-assisted FoV prediction.
#[derive(Parser)]
#[command(name = "vrgaze", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate planted-lag synthetic traces and their manifest.
    Synth(SynthArgs),
    /// Histograms, heatmaps, density maps and the head-gaze lag sweep.
    Analyze(AnalyzeArgs),
    /// Head-only vs gaze-assisted FoV prediction benchmark.
    Predict(PredictArgs),
    /// Quality / motion / ROI taxonomy of a video corpus.
    Taxonomy(TaxonomyArgs),
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker thread cap (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct TraceInput {
    /// Trace files or directories of traces.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long, default_value = "canonical-csv", value_parser = parse_format)]
    format: TraceFormat,
    /// Rate traces are resampled to before analysis.
    #[arg(long, default_value_t = 120.0)]
    freq_hz: f64,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[arg(long, default_value_t = 60.0)]
    duration_s: f64,
    #[arg(long, default_value_t = 120.0)]
    freq_hz: f64,
    #[arg(long, default_value_t = 14)]
    lag_samples: usize,
    /// Gaussian noise std-dev on the head position.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Regenerate exactly the corpus described by a previous manifest.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    traces: TraceInput,
    #[arg(long, default_value_t = 36)]
    bins: usize,
    /// Half extent of the relative gaze heatmap.
    #[arg(long, default_value_t = 0.2)]
    half_range: f64,
    #[arg(long, default_value_t = 60)]
    max_shift: usize,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    traces: TraceInput,
    /// Unused by the deterministic predictors; recorded for reproducibility.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated head predictors: polyreg, ar.
    #[arg(long, default_value = "polyreg,ar", value_delimiter = ',')]
    predictors: Vec<String>,
    #[arg(long, default_value = "8x8", value_parser = parse_grid)]
    grid: TileGrid,
    /// Disable column wraparound in tile distances.
    #[arg(long)]
    no_wrap: bool,
    #[arg(long, default_value_t = 0.12)]
    lag_s: f64,
    #[arg(long, default_value_t = 1.0)]
    horizon_s: f64,
    /// Predict every this many samples.
    #[arg(long, default_value_t = 6)]
    stride: usize,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Polynomial regression history, in samples.
    #[arg(long, default_value_t = 120)]
    poly_window: usize,
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// AR history, in samples.
    #[arg(long, default_value_t = 120)]
    ar_window: usize,
    #[arg(long, default_value_t = 0.005)]
    epsilon: f64,
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    /// Directory of `<video_id>.csv` object tracks.
    #[arg(long)]
    objects: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    prefetch_halfwidth: usize,
}

#[derive(Args)]
struct TaxonomyArgs {
    #[command(flatten)]
    common: Common,
    /// Directory of video folders, or a single video folder.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long, default_value_t = 64)]
    face_size: usize,
    #[arg(long, default_value = "0.333333333333,0.666666666667", value_parser = parse_cuts)]
    motion_cuts: Cuts,
    #[arg(long, default_value = "0.333333333333,0.666666666667", value_parser = parse_cuts)]
    roi_cuts: Cuts,
}

fn parse_format(s: &str) -> Result<TraceFormat, String> {
    s.parse().map_err(|e: vrgaze::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<TileGrid, String> {
    s.parse().map_err(|e: vrgaze::Error| e.to_string())
}

fn parse_cuts(s: &str) -> Result<Cuts, String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| e.to_string());
    let cuts = Cuts(parse(a)?, parse(b)?);
    cuts.validate().map_err(|e| e.to_string())?;
    Ok(cuts)
}

fn with_common(c: &Common) -> RunConfig {
    RunConfig {
        out: c.out.clone(),
        jobs: c.jobs,
        ..Default::default()
    }
}

fn with_traces(cfg: RunConfig, t: &TraceInput) -> RunConfig {
    RunConfig {
        inputs: t.input.clone(),
        format: t.format,
        freq_hz: t.freq_hz,
        ..cfg
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let written = match cli.command {
        Command::Synth(a) => commands::cmd_synth(&RunConfig {
            seed: a.seed,
            count: a.count,
            duration_s: a.duration_s,
            freq_hz: a.freq_hz,
            lag_samples: a.lag_samples,
            noise_sigma: a.noise,
            from_manifest: a.from_manifest,
            ..with_common(&a.common)
        })?,
        Command::Analyze(a) => commands::cmd_analyze(&RunConfig {
            bins: a.bins,
            half_range: a.half_range,
            max_shift: a.max_shift,
            ..with_traces(with_common(&a.common), &a.traces)
        })?,
        Command::Predict(a) => {
            if a.predictors.is_empty() {
                bail!("--predictors must name at least one predictor");
            }
            commands::cmd_predict(&RunConfig {
                seed: a.seed,
                predictors: a.predictors,
                grid: TileGrid {
                    wrap_columns: !a.no_wrap,
                    ..a.grid
                },
                lag_s: a.lag_s,
                horizon_s: a.horizon_s,
                stride: a.stride,
                degree: a.degree,
                poly_window: a.poly_window,
                order: a.order,
                ar_window: a.ar_window,
                epsilon: a.epsilon,
                c: a.c,
                objects: a.objects,
                prefetch_halfwidth: a.prefetch_halfwidth,
                ..with_traces(with_common(&a.common), &a.traces)
            })?
        }
        Command::Taxonomy(a) => commands::cmd_taxonomy(&RunConfig {
            inputs: a.input,
            face_size: a.face_size,
            motion_cuts: a.motion_cuts,
            roi_cuts: a.roi_cuts,
            ..with_common(&a.common)
        })?,
    };
    Ok(written)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()).context("vrgaze failed") {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

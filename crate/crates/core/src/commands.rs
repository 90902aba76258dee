//! File-based pipelines behind the command-line tool. Every command is
//! deterministic given its inputs and seed: inputs are visited in sorted
//! order and all numbers are written with fixed precision.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::{self, Axis, LagSweepResult};
use crate::data::{self, Channel, SynthParams, Trace, TraceFormat, DEFAULT_FREQ_HZ};
use crate::error::{invalid, Error, Result};
use crate::frame;
use crate::par;
use crate::predict::{
    self, ArPredictor, BenchmarkConfig, GazeAssist, HeadPredictor, PolyRegPredictor, TileGrid,
    DEFAULT_AGGRESSIVENESS, DEFAULT_EPSILON, DEFAULT_FEATURE_SCALE, DEFAULT_LAG_S,
};
use crate::taxonomy::{self, Cuts, PhaseCorrelation, SaliencyMap, TaxonomyVector};

/// Every knob of every subcommand. Unused fields are ignored by commands
/// that do not need them.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub format: TraceFormat,
    /// Caps worker threads; `None` uses every core.
    pub jobs: Option<usize>,

    // synth
    pub count: usize,
    pub duration_s: f64,
    pub freq_hz: f64,
    pub lag_samples: usize,
    pub noise_sigma: f64,
    pub from_manifest: Option<PathBuf>,

    // analyze
    pub bins: usize,
    pub half_range: f64,
    pub max_shift: usize,

    // predict
    pub predictors: Vec<String>,
    pub grid: TileGrid,
    pub lag_s: f64,
    pub horizon_s: f64,
    pub stride: usize,
    pub degree: usize,
    pub poly_window: usize,
    pub order: usize,
    pub ar_window: usize,
    pub epsilon: f64,
    pub c: f64,
    pub feature_scale: f64,
    pub objects: Option<PathBuf>,
    pub prefetch_halfwidth: usize,

    // taxonomy
    pub face_size: usize,
    pub motion_cuts: Cuts,
    pub roi_cuts: Cuts,
}

impl Default for RunConfig {
    fn default() -> Self {
        let poly = PolyRegPredictor::default();
        let ar = ArPredictor::default();
        Self {
            inputs: Vec::new(),
            out: PathBuf::from("out"),
            seed: 0,
            format: TraceFormat::CanonicalCsv,
            jobs: None,
            count: 5,
            duration_s: 60.0,
            freq_hz: DEFAULT_FREQ_HZ,
            lag_samples: 14,
            noise_sigma: 0.0,
            from_manifest: None,
            bins: 36,
            half_range: 0.2,
            max_shift: 60,
            predictors: vec!["polyreg".into(), "ar".into()],
            grid: TileGrid::default(),
            lag_s: DEFAULT_LAG_S,
            horizon_s: 1.0,
            stride: 6,
            degree: poly.degree,
            poly_window: poly.window,
            order: ar.order,
            ar_window: ar.window,
            epsilon: DEFAULT_EPSILON,
            c: DEFAULT_AGGRESSIVENESS,
            feature_scale: DEFAULT_FEATURE_SCALE,
            objects: None,
            prefetch_halfwidth: 1,
            face_size: 64,
            motion_cuts: Cuts::default(),
            roi_cuts: Cuts::default(),
        }
    }
}

impl RunConfig {
    fn prepare(&self) -> Result<()> {
        if let Some(j) = self.jobs {
            par::set_jobs(j);
        }
        fs::create_dir_all(&self.out)?;
        Ok(())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

// ---------------------------------------------------------------------------
// synth

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTraceEntry {
    pub file: String,
    pub video_id: String,
    pub user_id: String,
    pub seed: u64,
}

/// Everything needed to regenerate a synthetic corpus bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub seed: u64,
    pub duration_s: f64,
    pub freq_hz: f64,
    pub lag_samples: usize,
    pub noise_sigma: f64,
    pub traces: Vec<SynthTraceEntry>,
}

pub const SYNTH_MANIFEST: &str = "synth_manifest.json";

impl SynthManifest {
    pub fn plan(cfg: &RunConfig) -> Result<Self> {
        if cfg.count == 0 {
            return invalid("count must be at least 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let traces = (0..cfg.count)
            .map(|i| {
                let video_id = format!("syn{i:03}");
                let user_id = format!("u{i:03}");
                SynthTraceEntry {
                    file: format!("{video_id}__{user_id}.csv"),
                    video_id,
                    user_id,
                    seed: rng.random(),
                }
            })
            .collect();
        Ok(Self {
            seed: cfg.seed,
            duration_s: cfg.duration_s,
            freq_hz: cfg.freq_hz,
            lag_samples: cfg.lag_samples,
            noise_sigma: cfg.noise_sigma,
            traces,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(File::open(path)?)?)
    }

    fn params(&self, seed: u64) -> SynthParams {
        SynthParams {
            seed,
            duration_s: self.duration_s,
            freq_hz: self.freq_hz,
            lag_samples: self.lag_samples,
            noise_sigma: self.noise_sigma,
        }
    }
}

/// Writes `count` planted-lag traces plus the manifest that reproduces them.
pub fn cmd_synth(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.prepare()?;
    let manifest = match &cfg.from_manifest {
        Some(p) => SynthManifest::read(p)?,
        None => SynthManifest::plan(cfg)?,
    };
    let traces = par::map(&manifest.traces, |e| -> Result<Trace> {
        let mut t = data::synthesize_trace(&manifest.params(e.seed))?;
        t.video_id = e.video_id.clone();
        t.user_id = e.user_id.clone();
        Ok(t)
    });
    let mut written = Vec::new();
    for (entry, trace) in manifest.traces.iter().zip(traces) {
        let path = cfg.path(&entry.file);
        data::write_trace_file(&trace?, &path)?;
        written.push(path);
    }
    let mpath = cfg.path(SYNTH_MANIFEST);
    let mut w = create(&mpath)?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    w.flush()?;
    written.push(mpath);
    Ok(written)
}

// ---------------------------------------------------------------------------
// trace loading

fn is_trace_file(path: &Path, format: TraceFormat) -> bool {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    match format {
        TraceFormat::CanonicalCsv => ext == "csv",
        TraceFormat::RawQuaternionLog => matches!(ext.as_str(), "csv" | "txt" | "log"),
    }
}

/// Trace files named by `inputs`: files as given, directories expanded
/// (non-recursively) and sorted.
pub fn collect_trace_files(inputs: &[PathBuf], format: TraceFormat) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            found.retain(|p| p.is_file() && is_trace_file(p, format));
            found.sort();
            files.extend(found);
        } else if input.is_file() {
            files.push(input.clone());
        } else {
            return invalid(format!("input {} does not exist", input.display()));
        }
    }
    Ok(files)
}

/// Traces resampled onto a uniform grid, and the files that failed.
pub struct LoadedCorpus {
    pub traces: Vec<Trace>,
    pub errors: Vec<(PathBuf, String)>,
}

pub fn load_corpus(cfg: &RunConfig) -> Result<LoadedCorpus> {
    let files = collect_trace_files(&cfg.inputs, cfg.format)?;
    let results = par::map(&files, |p| {
        data::read_trace_file(p, cfg.format, None)
            .and_then(|t| data::resample_trace(&t, cfg.freq_hz))
    });
    let mut corpus = LoadedCorpus {
        traces: Vec::new(),
        errors: Vec::new(),
    };
    for (p, r) in files.into_iter().zip(results) {
        match r {
            Ok(t) => corpus.traces.push(t),
            Err(e) => {
                log::warn!("skipping {}: {e}", p.display());
                corpus.errors.push((p, e.to_string()));
            }
        }
    }
    Ok(corpus)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn write_errors(path: &Path, errors: &[(PathBuf, String)]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "file,error")?;
    for (p, e) in errors {
        writeln!(w, "{},{}", csv_field(&p.to_string_lossy()), csv_field(e))?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze

/// Exploration histograms, relative-gaze heatmap, density maps and the lag
/// sweep over a trace corpus. Unreadable traces go to `errors.csv`.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.prepare()?;
    let corpus = load_corpus(cfg)?;
    let mut written = Vec::new();
    let errors_path = cfg.path("errors.csv");
    write_errors(&errors_path, &corpus.errors)?;
    written.push(errors_path);
    let traces = &corpus.traces;
    if traces.is_empty() {
        return invalid("no readable traces in the input corpus");
    }

    for (axis, name) in [(Axis::Horizontal, "hist_horizontal.csv"), (Axis::Vertical, "hist_vertical.csv")] {
        let h = analytics::exploration_histogram(traces, axis, cfg.bins)?;
        let path = cfg.path(name);
        let mut w = create(&path)?;
        h.write_csv(&mut w)?;
        w.flush()?;
        written.push(path);
    }

    let rel = analytics::relative_gaze_heatmap(traces, cfg.half_range, cfg.bins)?;
    let (c, p) = (cfg.path("relative_gaze.csv"), cfg.path("relative_gaze.pgm"));
    rel.write_files(&c, &p)?;
    written.extend([c, p]);

    for (channel, stem) in [(Channel::Head, "density_head"), (Channel::Gaze, "density_gaze")] {
        let d = analytics::density_map(traces, channel, 2 * cfg.bins, cfg.bins)?;
        let (c, p) = (cfg.path(&format!("{stem}.csv")), cfg.path(&format!("{stem}.pgm")));
        d.write_files(&c, &p)?;
        written.extend([c, p]);
    }

    let sweeps = par::map(traces, |t| analytics::lag_mse_sweep(t, cfg.max_shift))
        .into_iter()
        .collect::<Result<Vec<LagSweepResult>>>()?;
    let path = cfg.path("lag_per_trace.csv");
    let mut w = create(&path)?;
    writeln!(w, "trace,best_shift,seconds,mse")?;
    for (t, s) in traces.iter().zip(&sweeps) {
        writeln!(
            w,
            "{},{},{:.6},{:.12e}",
            csv_field(&t.label()),
            s.best_shift,
            analytics::optimal_lag_seconds(s, cfg.freq_hz),
            s.mse[s.best_shift]
        )?;
    }
    w.flush()?;
    written.push(path);

    let agg = analytics::aggregate_lag_sweeps(&sweeps)?;
    let path = cfg.path("lag_sweep.csv");
    let mut w = create(&path)?;
    agg.write_csv(&mut w, cfg.freq_hz)?;
    w.flush()?;
    written.push(path);

    let path = cfg.path("lag_summary.csv");
    let mut w = create(&path)?;
    writeln!(w, "traces,best_shift,seconds")?;
    writeln!(
        w,
        "{},{},{:.6}",
        traces.len(),
        agg.best_shift,
        analytics::optimal_lag_seconds(&agg, cfg.freq_hz)
    )?;
    w.flush()?;
    written.push(path);
    Ok(written)
}

// ---------------------------------------------------------------------------
// predict

pub const KNOWN_PREDICTORS: [&str; 2] = ["polyreg", "ar"];

/// Builds head predictors by name.
pub fn build_predictors(cfg: &RunConfig) -> Result<Vec<Box<dyn HeadPredictor>>> {
    if cfg.predictors.is_empty() {
        return invalid("no predictor selected");
    }
    cfg.predictors
        .iter()
        .map(|name| -> Result<Box<dyn HeadPredictor>> {
            match name.as_str() {
                "polyreg" => Ok(Box::new(PolyRegPredictor {
                    degree: cfg.degree,
                    window: cfg.poly_window,
                })),
                "ar" => Ok(Box::new(ArPredictor {
                    order: cfg.order,
                    window: cfg.ar_window,
                })),
                other => invalid(format!(
                    "unknown predictor {other:?}; expected one of {}",
                    KNOWN_PREDICTORS.join(", ")
                )),
            }
        })
        .collect()
}

fn load_objects(cfg: &RunConfig, traces: &[Trace]) -> Result<BTreeMap<String, Vec<data::ObjectTrack>>> {
    let mut out = BTreeMap::new();
    let Some(dir) = &cfg.objects else {
        return Ok(out);
    };
    if !dir.is_dir() {
        return invalid(format!("object directory {} does not exist", dir.display()));
    }
    for t in traces {
        if out.contains_key(&t.video_id) {
            continue;
        }
        let path = dir.join(format!("{}.csv", t.video_id));
        if path.is_file() {
            out.insert(t.video_id.clone(), data::parse_object_tracks(File::open(&path)?)?);
        }
    }
    Ok(out)
}

/// Head-only and gaze-assisted benchmark of every configured predictor.
pub fn cmd_predict(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let predictors = build_predictors(cfg)?;
    cfg.prepare()?;
    let corpus = load_corpus(cfg)?;
    let mut written = Vec::new();
    let errors_path = cfg.path("errors.csv");
    write_errors(&errors_path, &corpus.errors)?;
    written.push(errors_path);
    if corpus.traces.is_empty() {
        return invalid("no readable traces in the input corpus");
    }
    let objects = load_objects(cfg, &corpus.traces)?;
    let bench = BenchmarkConfig {
        grid: cfg.grid,
        assist: GazeAssist {
            horizon_s: cfg.horizon_s,
            lag_s: cfg.lag_s,
            forecaster: ArPredictor {
                order: cfg.order,
                window: cfg.ar_window,
            },
        },
        stride: cfg.stride,
        epsilon: cfg.epsilon,
        c: cfg.c,
        feature_scale: cfg.feature_scale,
    };
    let rows = predict::run_benchmark(&corpus.traces, &predictors, &bench, &objects)?;

    let path = cfg.path("benchmark.csv");
    let mut w = create(&path)?;
    predict::write_benchmark_csv(&rows, &mut w)?;
    w.flush()?;
    written.push(path);

    let path = cfg.path("benchmark_meta.csv");
    let mut w = create(&path)?;
    writeln!(w, "key,value")?;
    let meta: [(&str, String); 16] = [
        ("grid", cfg.grid.to_string()),
        ("wrap_columns", cfg.grid.wrap_columns.to_string()),
        ("horizon_s", format!("{:.6}", cfg.horizon_s)),
        ("lag_s", format!("{:.6}", cfg.lag_s)),
        ("freq_hz", format!("{:.6}", cfg.freq_hz)),
        ("stride", cfg.stride.to_string()),
        ("epsilon", format!("{}", cfg.epsilon)),
        ("C", format!("{}", cfg.c)),
        ("feature_scale", format!("{}", cfg.feature_scale)),
        ("polyreg_degree", cfg.degree.to_string()),
        ("polyreg_window", cfg.poly_window.to_string()),
        ("ar_order", cfg.order.to_string()),
        ("ar_window", cfg.ar_window.to_string()),
        ("traces", corpus.traces.len().to_string()),
        ("records", rows.first().map_or(0, |r| r.report.count).to_string()),
        ("objects", objects.len().to_string()),
    ];
    for (k, v) in meta {
        writeln!(w, "{k},{v}")?;
    }
    w.flush()?;
    written.push(path);

    let path = cfg.path("prefetch.csv");
    let mut w = create(&path)?;
    writeln!(w, "predictor,mode,halfwidth,hit_ratio,fetched_fraction")?;
    for r in &rows {
        for hw in 0..=cfg.prefetch_halfwidth {
            let s = predict::simulate_tile_prefetch(&r.records, &cfg.grid, hw);
            writeln!(
                w,
                "{},{},{hw},{:.6},{:.6}",
                r.predictor, r.mode, s.hit_ratio, s.fetched_fraction
            )?;
        }
    }
    w.flush()?;
    written.push(path);

    for r in &rows {
        let path = cfg.path(&format!("predictions_{}_{}.csv", r.predictor, r.mode));
        let mut w = create(&path)?;
        predict::write_predictions_csv(&r.records, &mut w)?;
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// taxonomy

fn find_saliency(dir: &Path) -> Result<PathBuf> {
    for name in ["saliency.pgm", "saliency.csv"] {
        let p = dir.join(name);
        if p.is_file() {
            return Ok(p);
        }
    }
    invalid(format!("no saliency.pgm or saliency.csv in {}", dir.display()))
}

/// Raw metrics of one video directory holding `ref/`, `test/` and a
/// saliency map.
pub fn measure_video(dir: &Path, face_size: usize) -> Result<TaxonomyVector> {
    let reference = frame::read_pgm_dir(&dir.join("ref"))?;
    let test = frame::read_pgm_dir(&dir.join("test"))?;
    let quality = taxonomy::video_quality(&reference, &test)?;
    let motion = taxonomy::video_motion(&reference, face_size, &PhaseCorrelation::default())?;
    let saliency = SaliencyMap::read_file(&find_saliency(dir)?)?;
    let roi_sd = taxonomy::roi_dispersion(&taxonomy::extract_rois(&saliency)?)?;
    Ok(TaxonomyVector::new(quality, motion, roi_sd))
}

fn video_dirs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    if inputs.is_empty() {
        return invalid("no input directory given");
    }
    let mut dirs = Vec::new();
    for input in inputs {
        if !input.is_dir() {
            return invalid(format!("input {} is not a directory", input.display()));
        }
        if input.join("ref").is_dir() {
            dirs.push(input.clone());
            continue;
        }
        let mut found: Vec<PathBuf> = fs::read_dir(input)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        found.retain(|p| p.is_dir());
        found.sort();
        dirs.extend(found);
    }
    Ok(dirs)
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6}")
    }
}

/// Measures, normalizes and classifies every video under the inputs.
pub fn cmd_taxonomy(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.motion_cuts.validate()?;
    cfg.roi_cuts.validate()?;
    let dirs = video_dirs(&cfg.inputs)?;
    if dirs.is_empty() {
        return invalid("no video directories found");
    }
    cfg.prepare()?;
    let results = par::map(&dirs, |d| measure_video(d, cfg.face_size));
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (d, r) in dirs.iter().zip(results) {
        let id = d
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match r {
            Ok(v) => ok.push((id, v)),
            Err(e) => {
                log::warn!("skipping video {id}: {e}");
                errors.push((d.clone(), e.to_string()));
            }
        }
    }
    let mut written = Vec::new();
    let epath = cfg.path("taxonomy_errors.csv");
    write_errors(&epath, &errors)?;
    written.push(epath);
    if ok.is_empty() {
        return Err(Error::InvalidInput("no video could be measured".into()));
    }
    let vectors: Vec<TaxonomyVector> = ok.iter().map(|(_, v)| *v).collect();
    let normalized = taxonomy::normalize_corpus(&vectors)?;
    let path = cfg.path("taxonomy.csv");
    let mut w = create(&path)?;
    writeln!(
        w,
        "video_id,quality_db,motion_mag,roi_sd,quality_norm,motion_norm,roi_norm,motion_cell,roi_cell"
    )?;
    for ((id, _), v) in ok.iter().zip(&normalized) {
        let (mc, rc) = taxonomy::classify_video(v, cfg.motion_cuts, cfg.roi_cuts)?;
        let [qn, mn, rn] = v.normalized.unwrap_or([f64::NAN; 3]);
        writeln!(
            w,
            "{},{},{:.9},{:.9},{qn:.6},{mn:.6},{rn:.6},{mc},{rc}",
            csv_field(id),
            fmt_db(v.quality_db),
            v.motion_mag,
            v.roi_sd
        )?;
    }
    w.flush()?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{write_pgm_file, FrameGray};

    fn cfg_in(dir: &Path) -> RunConfig {
        RunConfig {
            out: dir.to_path_buf(),
            ..Default::default()
        }
    }

    #[test]
    fn synth_writes_traces_and_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            count: 5,
            duration_s: 2.0,
            seed: 9,
            ..cfg_in(tmp.path())
        };
        let files = cmd_synth(&cfg).unwrap();
        assert_eq!(files.len(), 6);
        let m = SynthManifest::read(&tmp.path().join(SYNTH_MANIFEST)).unwrap();
        assert_eq!(m.seed, 9);
        assert_eq!(m.lag_samples, 14);

        let again = tempfile::tempdir().unwrap();
        let regen = RunConfig {
            from_manifest: Some(tmp.path().join(SYNTH_MANIFEST)),
            ..cfg_in(again.path())
        };
        cmd_synth(&regen).unwrap();
        for e in &m.traces {
            let a = fs::read(tmp.path().join(&e.file)).unwrap();
            let b = fs::read(again.path().join(&e.file)).unwrap();
            assert_eq!(a, b);
        }
        assert!(cmd_synth(&RunConfig {
            count: 0,
            ..cfg_in(tmp.path())
        })
        .is_err());
    }

    #[test]
    fn analyze_recovers_planted_lag_and_lists_bad_files() {
        let tmp = tempfile::tempdir().unwrap();
        let traces = tmp.path().join("traces");
        cmd_synth(&RunConfig {
            count: 3,
            duration_s: 10.0,
            out: traces.clone(),
            ..Default::default()
        })
        .unwrap();
        fs::write(traces.join("broken__u.csv"), "not,a,trace\n1,2,3\n").unwrap();
        let out = tmp.path().join("analysis");
        let cfg = RunConfig {
            inputs: vec![traces],
            out: out.clone(),
            bins: 24,
            ..Default::default()
        };
        cmd_analyze(&cfg).unwrap();
        let summary = fs::read_to_string(out.join("lag_summary.csv")).unwrap();
        assert_eq!(summary.lines().nth(1).unwrap(), "3,14,0.116667");
        let errors = fs::read_to_string(out.join("errors.csv")).unwrap();
        assert_eq!(errors.lines().count(), 2);
        assert!(errors.contains("broken__u.csv"));
        let pgm = frame::read_pgm_file(&out.join("relative_gaze.pgm")).unwrap();
        assert_eq!((pgm.width, pgm.height), (24, 24));

        let empty = tmp.path().join("empty");
        fs::create_dir_all(&empty).unwrap();
        assert!(cmd_analyze(&RunConfig {
            inputs: vec![empty],
            out: tmp.path().join("o2"),
            ..Default::default()
        })
        .is_err());
    }

    #[test]
    fn predict_rejects_unknown_predictor() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            predictors: vec!["lstm".into()],
            ..cfg_in(tmp.path())
        };
        let err = cmd_predict(&cfg).unwrap_err().to_string();
        assert!(err.contains("lstm"));
    }

    fn write_video(dir: &Path, shift: usize, offset: u16) {
        let (w, h) = (128, 64);
        let pattern = |c: usize, r: usize| (((c * 7 + r * 13) % 31) * 6 + ((c / 8 + r / 8) % 2) * 40) as u16;
        fs::create_dir_all(dir.join("ref")).unwrap();
        fs::create_dir_all(dir.join("test")).unwrap();
        for k in 0..3 {
            let f = FrameGray::from_fn(w, h, 8, |c, r| pattern((c + w - (k * shift) % w) % w, r)).unwrap();
            let t = FrameGray::from_fn(w, h, 8, |c, r| (f.get(c, r) + offset).min(255)).unwrap();
            write_pgm_file(&f, &dir.join(format!("ref/{k:03}.pgm"))).unwrap();
            write_pgm_file(&t, &dir.join(format!("test/{k:03}.pgm"))).unwrap();
        }
        let sal = FrameGray::from_fn(w, h, 8, |c, r| {
            let d2 = (c as f64 - 40.0).powi(2) + (r as f64 - 30.0).powi(2);
            (200.0 * (-d2 / 50.0).exp()) as u16
        })
        .unwrap();
        write_pgm_file(&sal, &dir.join("saliency.pgm")).unwrap();
    }

    #[test]
    fn taxonomy_orders_motion_and_is_deterministic() {
        let tmp = tempfile::tempdir().unwrap();
        let videos = tmp.path().join("videos");
        write_video(&videos.join("a_static"), 0, 2);
        write_video(&videos.join("b_panning"), 6, 8);
        fs::create_dir_all(videos.join("c_broken")).unwrap();
        let run = |out: &str| {
            let cfg = RunConfig {
                inputs: vec![videos.clone()],
                out: tmp.path().join(out),
                face_size: 32,
                ..Default::default()
            };
            cmd_taxonomy(&cfg).unwrap();
            fs::read_to_string(tmp.path().join(out).join("taxonomy.csv")).unwrap()
        };
        let first = run("o1");
        assert_eq!(first, run("o2"));
        let rows: Vec<Vec<&str>> = first.lines().skip(1).map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 2);
        let motion_norm = |i: usize| rows[i][5].parse::<f64>().unwrap();
        assert!(motion_norm(0) < motion_norm(1));
        let errs = fs::read_to_string(tmp.path().join("o1/taxonomy_errors.csv")).unwrap();
        assert!(errs.contains("c_broken"));

        let single = RunConfig {
            inputs: vec![videos.join("a_static")],
            out: tmp.path().join("o3"),
            face_size: 32,
            ..Default::default()
        };
        cmd_taxonomy(&single).unwrap();
        let one = fs::read_to_string(tmp.path().join("o3/taxonomy.csv")).unwrap();
        let row: Vec<&str> = one.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(&row[4..7], &["0.500000", "0.500000", "0.500000"]);
    }
}

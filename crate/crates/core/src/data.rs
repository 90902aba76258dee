//! Head/gaze traces: parsing, serialization, resampling, synthesis and
//! validation, plus corpus manifests and object tracks.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geo::{self, wrap_unit, wraparound_dx, NormalizedPoint, Quaternion, UnitVector3};

pub const CANONICAL_HEADER: [&str; 5] = ["t", "head_x", "head_y", "gaze_x", "gaze_y"];
pub const RAW_QUATERNION_HEADER: [&str; 8] = ["t", "qx", "qy", "qz", "qw", "gx", "gy", "gz"];

/// Nominal headset sampling rate.
pub const DEFAULT_FREQ_HZ: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Seconds from video start.
    pub t: f64,
    pub head: NormalizedPoint,
    pub gaze: NormalizedPoint,
}

/// Head and gaze samples of one user watching one video.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub video_id: String,
    pub user_id: String,
    pub freq_hz: f64,
    pub samples: Vec<Sample>,
}

impl Trace {
    /// Builds a trace, enforcing ≥ 2 samples, strictly increasing time and a
    /// positive rate. Use [`validate_trace`] for a full report instead.
    pub fn new(
        video_id: impl Into<String>,
        user_id: impl Into<String>,
        freq_hz: f64,
        samples: Vec<Sample>,
    ) -> Result<Self> {
        if !(freq_hz > 0.0 && freq_hz.is_finite()) {
            return invalid(format!("sampling rate must be positive, got {freq_hz}"));
        }
        if samples.len() < 2 {
            return invalid(format!("a trace needs at least 2 samples, got {}", samples.len()));
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return invalid(format!(
                "timestamps not strictly increasing at sample {}",
                i + 1
            ));
        }
        Ok(Self {
            video_id: video_id.into(),
            user_id: user_id.into(),
            freq_hz,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn heads(&self) -> Vec<NormalizedPoint> {
        self.samples.iter().map(|s| s.head).collect()
    }

    pub fn gazes(&self) -> Vec<NormalizedPoint> {
        self.samples.iter().map(|s| s.gaze).collect()
    }

    /// Mean sample spacing in seconds.
    pub fn step(&self) -> f64 {
        self.duration() / (self.samples.len().saturating_sub(1)).max(1) as f64
    }

    /// True when every spacing is within `rel_tol` of the mean spacing.
    pub fn is_uniform(&self, rel_tol: f64) -> bool {
        let step = self.step();
        step > 0.0
            && self
                .samples
                .windows(2)
                .all(|w| ((w[1].t - w[0].t) - step).abs() <= rel_tol * step)
    }

    /// `video__user` label used for file names and report rows.
    pub fn label(&self) -> String {
        if self.user_id.is_empty() {
            self.video_id.clone()
        } else {
            format!("{}__{}", self.video_id, self.user_id)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceFormat {
    /// `t,head_x,head_y,gaze_x,gaze_y`
    #[default]
    CanonicalCsv,
    /// `t,qx,qy,qz,qw,gx,gy,gz`
    RawQuaternionLog,
}

impl FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical-csv" => Ok(Self::CanonicalCsv),
            "raw-quaternion-log" => Ok(Self::RawQuaternionLog),
            other => invalid(format!("unknown trace format {other:?}")),
        }
    }
}

impl fmt::Display for TraceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CanonicalCsv => "canonical-csv",
            Self::RawQuaternionLog => "raw-quaternion-log",
        })
    }
}

/// Identity and rate to attach to a parsed trace.
#[derive(Debug, Clone, Default)]
pub struct TraceMeta {
    pub video_id: String,
    pub user_id: String,
    /// When `None`, the rate is estimated from the timestamps.
    pub freq_hz: Option<f64>,
}

impl TraceMeta {
    /// Derives ids from a `video__user.csv` file name; anything without the
    /// separator becomes a video id with an empty user.
    pub fn from_path(path: &Path) -> Self {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let (video_id, user_id) = match stem.split_once("__") {
            Some((v, u)) => (v.to_owned(), u.to_owned()),
            None => (stem, String::new()),
        };
        Self {
            video_id,
            user_id,
            freq_hz: None,
        }
    }
}

/// Gaze in the raw log is a direction vector in headset-world coordinates.
/// This is the one place that assumption lives.
fn raw_gaze_to_point(gx: f64, gy: f64, gz: f64) -> Result<NormalizedPoint> {
    let g = UnitVector3::normalized(gx, gy, gz)?;
    Ok(geo::unit_vector_to_point(&g))
}

pub fn parse_trace<R: Read>(source: R, format: TraceFormat) -> Result<Trace> {
    parse_trace_with(source, format, &TraceMeta::default())
}

pub fn parse_trace_with<R: Read>(source: R, format: TraceFormat, meta: &TraceMeta) -> Result<Trace> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let expected: &[&str] = match format {
        TraceFormat::CanonicalCsv => &CANONICAL_HEADER,
        TraceFormat::RawQuaternionLog => &RAW_QUATERNION_HEADER,
    };
    let headers = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(Error::Parse {
            line: 1,
            message: "empty input".into(),
        });
    }
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {:?}, got {:?}", expected.join(","), headers),
        });
    }

    let mut samples: Vec<Sample> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let perr = |message: String| Error::Parse { line, message };
        if rec.len() != expected.len() {
            return Err(perr(format!(
                "expected {} fields, got {}",
                expected.len(),
                rec.len()
            )));
        }
        let mut vals = [0.0f64; 8];
        for (i, field) in rec.iter().enumerate() {
            vals[i] = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| perr(format!("field {:?} is not a finite number", field)))?;
        }
        let t = vals[0];
        if t < 0.0 {
            return Err(perr(format!("negative timestamp {t}")));
        }
        let sample = match format {
            TraceFormat::CanonicalCsv => {
                let head = NormalizedPoint::new(vals[1], vals[2]).map_err(|e| perr(e.to_string()))?;
                let gaze = NormalizedPoint::new(vals[3], vals[4]).map_err(|e| perr(e.to_string()))?;
                Sample { t, head, gaze }
            }
            TraceFormat::RawQuaternionLog => {
                let q = Quaternion::new(vals[1], vals[2], vals[3], vals[4])
                    .map_err(|e| perr(e.to_string()))?;
                let head = geo::quat_to_point(&q).map_err(|e| perr(e.to_string()))?;
                let gaze =
                    raw_gaze_to_point(vals[5], vals[6], vals[7]).map_err(|e| perr(e.to_string()))?;
                Sample { t, head, gaze }
            }
        };
        if let Some(prev) = samples.last() {
            if sample.t <= prev.t {
                return Err(Error::Ordering {
                    line,
                    t: sample.t,
                    previous: prev.t,
                });
            }
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no samples".into(),
        });
    }
    if samples.len() < 2 {
        return invalid("a trace needs at least 2 samples");
    }
    let freq_hz = meta.freq_hz.unwrap_or_else(|| {
        let span = samples[samples.len() - 1].t - samples[0].t;
        (samples.len() - 1) as f64 / span
    });
    Trace::new(meta.video_id.clone(), meta.user_id.clone(), freq_hz, samples)
}

pub fn read_trace_file(path: &Path, format: TraceFormat, freq_hz: Option<f64>) -> Result<Trace> {
    let mut meta = TraceMeta::from_path(path);
    meta.freq_hz = freq_hz;
    parse_trace_with(std::fs::File::open(path)?, format, &meta)
}

fn fmt_x(x: f64) -> String {
    // rounding to the declared precision must not produce 1.000000000
    let s = format!("{:.9}", x);
    if s.starts_with("1.") {
        "0.000000000".to_owned()
    } else {
        s
    }
}

/// Writes a trace as canonical CSV: timestamps with 6 decimals, coordinates
/// with 9, LF endings.
pub fn write_canonical<W: Write>(trace: &Trace, mut out: W) -> Result<()> {
    writeln!(out, "{}", CANONICAL_HEADER.join(","))?;
    for s in &trace.samples {
        writeln!(
            out,
            "{:.6},{},{:.9},{},{:.9}",
            s.t,
            fmt_x(s.head.x),
            s.head.y,
            fmt_x(s.gaze.x),
            s.gaze.y
        )?;
    }
    Ok(())
}

pub fn write_trace_file(trace: &Trace, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_canonical(trace, &mut f)?;
    f.flush()?;
    Ok(())
}

fn lerp_point(a: &NormalizedPoint, b: &NormalizedPoint, frac: f64) -> NormalizedPoint {
    NormalizedPoint {
        x: wrap_unit(a.x + frac * wraparound_dx(a.x, b.x)),
        y: a.y + frac * (b.y - a.y),
    }
}

/// Resamples onto a uniform grid starting at the first timestamp, with linear
/// interpolation that takes the short way across the x seam.
pub fn resample_trace(trace: &Trace, target_hz: f64) -> Result<Trace> {
    if !(target_hz > 0.0 && target_hz.is_finite()) {
        return invalid(format!("target rate must be positive, got {target_hz}"));
    }
    if trace.samples.len() < 2 {
        return invalid("cannot resample fewer than 2 samples");
    }
    let src = &trace.samples;
    let t0 = src[0].t;
    let t_last = src[src.len() - 1].t;
    let step = 1.0 / target_hz;
    let snap = 1e-9 * step.max(1.0);
    let n = ((t_last - t0) * target_hz + 1e-9).floor() as usize + 1;

    let mut out = Vec::with_capacity(n);
    let mut seg = 0usize;
    for k in 0..n {
        let t = t0 + k as f64 * step;
        while seg + 2 < src.len() && src[seg + 1].t <= t {
            seg += 1;
        }
        let (a, b) = (&src[seg], &src[seg + 1]);
        let sample = if (t - a.t).abs() <= snap {
            Sample { t, ..*a }
        } else if (t - b.t).abs() <= snap {
            Sample { t, ..*b }
        } else {
            let frac = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
            Sample {
                t,
                head: lerp_point(&a.head, &b.head, frac),
                gaze: lerp_point(&a.gaze, &b.gaze, frac),
            }
        };
        out.push(sample);
    }
    if out.len() < 2 {
        return invalid("resampled trace has fewer than 2 samples");
    }
    Trace::new(trace.video_id.clone(), trace.user_id.clone(), target_hz, out)
}

/// Parameters of a synthetic planted-lag trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    pub duration_s: f64,
    pub freq_hz: f64,
    /// Head trails gaze by this many samples.
    pub lag_samples: usize,
    /// Std-dev of the Gaussian noise added to the head position.
    pub noise_sigma: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 0,
            duration_s: 60.0,
            freq_hz: DEFAULT_FREQ_HZ,
            lag_samples: 14,
            noise_sigma: 0.0,
        }
    }
}

const GAZE_Y_MIN: f64 = 0.05;
const GAZE_Y_MAX: f64 = 0.95;
// velocity process: OU with these stationary std-devs (normalized units / s)
const WALK_SPEED_X: f64 = 0.12;
const WALK_SPEED_Y: f64 = 0.05;
const WALK_TAU_S: f64 = 0.6;

fn reflect(mut y: f64, v: &mut f64) -> f64 {
    loop {
        if y < GAZE_Y_MIN {
            y = 2.0 * GAZE_Y_MIN - y;
            *v = -*v;
        } else if y > GAZE_Y_MAX {
            y = 2.0 * GAZE_Y_MAX - y;
            *v = -*v;
        } else {
            return y;
        }
    }
}

/// Smooth gaze random walk of `n` samples.
fn gaze_walk(rng: &mut ChaCha8Rng, n: usize, dt: f64) -> Vec<NormalizedPoint> {
    let decay = (-dt / WALK_TAU_S).exp();
    let kick = (1.0 - decay * decay).sqrt();
    let mut x: f64 = rng.random();
    let mut y: f64 = 0.5 + 0.1 * (rng.random::<f64>() - 0.5);
    let mut vx = WALK_SPEED_X * rng.sample::<f64, _>(StandardNormal);
    let mut vy = WALK_SPEED_Y * rng.sample::<f64, _>(StandardNormal);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(NormalizedPoint { x, y });
        vx = decay * vx + kick * WALK_SPEED_X * rng.sample::<f64, _>(StandardNormal);
        vy = decay * vy + kick * WALK_SPEED_Y * rng.sample::<f64, _>(StandardNormal);
        x = wrap_unit(x + vx * dt);
        y = reflect(y + vy * dt, &mut vy);
    }
    out
}

/// Deterministic synthetic trace in which the head follows the gaze
/// `lag_samples` samples later, plus optional Gaussian head noise.
pub fn synthesize_trace(params: &SynthParams) -> Result<Trace> {
    let SynthParams {
        seed,
        duration_s,
        freq_hz,
        lag_samples,
        noise_sigma,
    } = *params;
    if !(freq_hz > 0.0 && freq_hz.is_finite()) || !(duration_s > 0.0 && duration_s.is_finite()) {
        return invalid("duration and rate must be positive");
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return invalid(format!("noise sigma must be non-negative, got {noise_sigma}"));
    }
    let n = (duration_s * freq_hz).round() as usize;
    if n < 2 || n <= lag_samples {
        return invalid(format!(
            "duration x rate ({n} samples) must exceed the lag ({lag_samples})"
        ));
    }
    let dt = 1.0 / freq_hz;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // gaze_ext[j] is the gaze at sample j - lag
    let gaze_ext = gaze_walk(&mut rng, n + lag_samples, dt);
    let noise = Normal::new(0.0, noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let samples = (0..n)
        .map(|i| {
            let gaze = gaze_ext[i + lag_samples];
            let lagged = gaze_ext[i];
            let head = if noise_sigma > 0.0 {
                NormalizedPoint::wrapped(
                    lagged.x + noise.sample(&mut rng),
                    lagged.y + noise.sample(&mut rng),
                )
            } else {
                lagged
            };
            Sample {
                t: i as f64 * dt,
                head,
                gaze,
            }
        })
        .collect();
    Trace::new(format!("synth{seed}"), "u0", freq_hz, samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Head,
    Gaze,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A coordinate outside its valid range.
    Range {
        index: usize,
        channel: Channel,
        x: f64,
        y: f64,
    },
    /// Timestamp not after its predecessor, or negative.
    Ordering { index: usize, t: f64 },
    /// Spacing wider than five nominal sample periods.
    Gap { index: usize, dt: f64 },
    /// Structural problems with the trace as a whole.
    Structure(String),
}

pub fn validate_trace(trace: &Trace) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(trace.freq_hz > 0.0 && trace.freq_hz.is_finite()) {
        out.push(Violation::Structure(format!(
            "non-positive rate {}",
            trace.freq_hz
        )));
    }
    if trace.samples.len() < 2 {
        out.push(Violation::Structure(format!(
            "{} samples, need at least 2",
            trace.samples.len()
        )));
    }
    let max_gap = 5.0 / trace.freq_hz;
    for (i, s) in trace.samples.iter().enumerate() {
        for (channel, p) in [(Channel::Head, s.head), (Channel::Gaze, s.gaze)] {
            if !p.is_valid() {
                out.push(Violation::Range {
                    index: i,
                    channel,
                    x: p.x,
                    y: p.y,
                });
            }
        }
        if !(s.t >= 0.0) {
            out.push(Violation::Ordering { index: i, t: s.t });
        }
        if i > 0 {
            let dt = s.t - trace.samples[i - 1].t;
            if dt <= 0.0 {
                out.push(Violation::Ordering { index: i, t: s.t });
            } else if trace.freq_hz > 0.0 && dt > max_gap {
                out.push(Violation::Gap { index: i, dt });
            }
        }
    }
    out
}

/// Time-indexed positions of one tracked object.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectTrack {
    pub object_id: String,
    /// (t, position), time-ordered.
    pub positions: Vec<(f64, NormalizedPoint)>,
}

impl ObjectTrack {
    /// Position at `t`, interpolated; clamps to the ends of the track.
    pub fn at(&self, t: f64) -> Option<NormalizedPoint> {
        let p = &self.positions;
        let first = p.first()?;
        if t <= first.0 {
            return Some(first.1);
        }
        let last = p.last()?;
        if t >= last.0 {
            return Some(last.1);
        }
        let i = p.partition_point(|(pt, _)| *pt <= t);
        let (ta, a) = p[i - 1];
        let (tb, b) = p[i];
        Some(lerp_point(&a, &b, (t - ta) / (tb - ta)))
    }
}

#[derive(Debug, Deserialize)]
struct ObjectRow {
    object_id: String,
    t: f64,
    x: f64,
    y: f64,
}

/// Reads `object_id,t,x,y` rows into tracks ordered by object id.
pub fn parse_object_tracks<R: Read>(source: R) -> Result<Vec<ObjectTrack>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut tracks: std::collections::BTreeMap<String, Vec<(f64, NormalizedPoint)>> =
        Default::default();
    for rec in rdr.deserialize::<ObjectRow>() {
        let row = rec?;
        let p = NormalizedPoint::new(row.x, row.y)?;
        let list = tracks.entry(row.object_id).or_default();
        if let Some((prev, _)) = list.last() {
            if row.t <= *prev {
                return invalid(format!("object track timestamps out of order at t={}", row.t));
            }
        }
        list.push((row.t, p));
    }
    Ok(tracks
        .into_iter()
        .map(|(object_id, positions)| ObjectTrack {
            object_id,
            positions,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MotionCell {
    Motionless,
    Middle,
    Moving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoiCell {
    Disperse,
    Middle,
    Intensive,
}

impl fmt::Display for MotionCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for RoiCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub video_id: String,
    pub url: String,
    pub content: String,
    pub roi_cell: RoiCell,
    pub motion_cell: MotionCell,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserEntry {
    pub user_id: String,
    pub gender: String,
    pub age_band: String,
    pub mobile_vr_exp: String,
    pub room_scale_vr_exp: String,
    pub video_360_exp: String,
}

/// Videos and users of a corpus, stored as `videos.csv` + `users.csv`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusManifest {
    pub videos: Vec<VideoEntry>,
    pub users: Vec<UserEntry>,
}

impl CorpusManifest {
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for v in &self.videos {
            if !seen.insert(v.video_id.as_str()) {
                return invalid(format!("duplicate video id {:?}", v.video_id));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for u in &self.users {
            if !seen.insert(u.user_id.as_str()) {
                return invalid(format!("duplicate user id {:?}", u.user_id));
            }
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let videos = csv::Reader::from_path(dir.join("videos.csv"))?
            .deserialize()
            .collect::<std::result::Result<Vec<VideoEntry>, _>>()?;
        let users = csv::Reader::from_path(dir.join("users.csv"))?
            .deserialize()
            .collect::<std::result::Result<Vec<UserEntry>, _>>()?;
        let m = Self { videos, users };
        m.validate()?;
        Ok(m)
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        self.validate()?;
        let mut w = csv::Writer::from_path(dir.join("videos.csv"))?;
        for v in &self.videos {
            w.serialize(v)?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("users.csv"))?;
        for u in &self.users {
            w.serialize(u)?;
        }
        w.flush()?;
        Ok(())
    }
}

//! Viewport (FoV) prediction for tile-based streaming: head-trajectory
//! baselines, gaze forecasting, passive-aggressive fusion of gaze and head
//! predictions, evaluation metrics and a tile-prefetch simulation.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::data::{ObjectTrack, Trace};
use crate::error::{invalid, Error, Result};
use crate::geo::{wraparound_dx, NormalizedPoint};
use crate::par;

// ---------------------------------------------------------------------------
// Tiles and metrics

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileGrid {
    pub rows: usize,
    pub cols: usize,
    /// Column distance wraps around the 360° seam.
    pub wrap_columns: bool,
}

impl Default for TileGrid {
    fn default() -> Self {
        Self {
            rows: 8,
            cols: 8,
            wrap_columns: true,
        }
    }
}

impl TileGrid {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid(format!("tile grid must be at least 1x1, got {rows}x{cols}"));
        }
        Ok(Self {
            rows,
            cols,
            wrap_columns: true,
        })
    }

    pub fn tile_count(&self) -> usize {
        self.rows * self.cols
    }

    fn col_distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        if self.wrap_columns {
            d.min(self.cols - d)
        } else {
            d
        }
    }
}

impl fmt::Display for TileGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl FromStr for TileGrid {
    type Err = Error;

    /// Parses `RxC`, e.g. `8x8`.
    fn from_str(s: &str) -> Result<Self> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::InvalidInput(format!("grid {s:?} is not RxC")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("grid {s:?} is not RxC")))
        };
        Self::new(parse(r)?, parse(c)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TileIndex {
    pub row: usize,
    pub col: usize,
}

pub fn tile_of(p: &NormalizedPoint, g: &TileGrid) -> TileIndex {
    let row = ((p.y * g.rows as f64).floor().max(0.0) as usize).min(g.rows - 1);
    let col = ((p.x * g.cols as f64).floor().max(0.0) as usize).min(g.cols - 1);
    TileIndex { row, col }
}

/// Euclidean distance on the unit-square frame with a periodic x axis.
pub fn unified_euclidean(a: &NormalizedPoint, b: &NormalizedPoint) -> f64 {
    wraparound_dx(a.x, b.x).hypot(a.y - b.y)
}

pub fn manhattan_tile_distance(a: &NormalizedPoint, b: &NormalizedPoint, g: &TileGrid) -> usize {
    let (ta, tb) = (tile_of(a, g), tile_of(b, g));
    ta.row.abs_diff(tb.row) + g.col_distance(ta.col, tb.col)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRecord {
    pub t: f64,
    pub predicted: NormalizedPoint,
    pub truth: NormalizedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    /// Mean unified Euclidean distance.
    pub euclidean: f64,
    /// Mean Manhattan tile distance.
    pub manhattan: f64,
    /// Fraction of records whose predicted tile is the true tile.
    pub tile_accuracy: f64,
    pub count: usize,
}

pub fn evaluate(records: &[PredictionRecord], g: &TileGrid) -> Result<MetricReport> {
    if records.is_empty() {
        return invalid("cannot evaluate an empty record list");
    }
    let (mut e, mut m, mut hits) = (0.0, 0usize, 0usize);
    for r in records {
        e += unified_euclidean(&r.predicted, &r.truth);
        m += manhattan_tile_distance(&r.predicted, &r.truth, g);
        if tile_of(&r.predicted, g) == tile_of(&r.truth, g) {
            hits += 1;
        }
    }
    let n = records.len() as f64;
    Ok(MetricReport {
        euclidean: e / n,
        manhattan: m as f64 / n,
        tile_accuracy: hits as f64 / n,
        count: records.len(),
    })
}

/// Relative improvement of gaze-assisted over head-only, in percent.
/// Distances improve when they shrink, accuracy when it grows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Improvement {
    pub euclidean_pct: f64,
    pub manhattan_pct: f64,
    pub accuracy_pct: f64,
}

impl Improvement {
    pub fn between(head_only: &MetricReport, assisted: &MetricReport) -> Self {
        let rel = |base: f64, new: f64| {
            if base == 0.0 {
                0.0
            } else {
                100.0 * (base - new) / base
            }
        };
        Self {
            euclidean_pct: rel(head_only.euclidean, assisted.euclidean),
            manhattan_pct: rel(head_only.manhattan, assisted.manhattan),
            accuracy_pct: -rel(head_only.tile_accuracy, assisted.tile_accuracy),
        }
    }
}

pub fn write_predictions_csv<W: Write>(records: &[PredictionRecord], mut out: W) -> Result<()> {
    writeln!(out, "t,pred_x,pred_y,truth_x,truth_y")?;
    for r in records {
        writeln!(
            out,
            "{:.6},{:.9},{:.9},{:.9},{:.9}",
            r.t, r.predicted.x, r.predicted.y, r.truth.x, r.truth.y
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Trajectory extrapolation

/// x positions made continuous across the seam.
fn unwrap_x(history: &[NormalizedPoint]) -> Vec<f64> {
    let mut out = Vec::with_capacity(history.len());
    let mut acc = match history.first() {
        Some(p) => p.x,
        None => return out,
    };
    out.push(acc);
    for w in history.windows(2) {
        acc += wraparound_dx(w[0].x, w[1].x);
        out.push(acc);
    }
    out
}

/// Least-squares polynomial through `(ts, vs)`, evaluated at `at`.
fn polyfit_eval(ts: &[f64], vs: &[f64], degree: usize, at: f64) -> Option<f64> {
    let n = ts.len();
    let a = DMatrix::from_fn(n, degree + 1, |i, j| ts[i].powi(j as i32));
    let b = DVector::from_column_slice(vs);
    let svd = a.svd(true, true);
    let coef = svd.solve(&b, 1e-12).ok()?;
    let v = (0..=degree).map(|j| coef[j] * at.powi(j as i32)).sum::<f64>();
    v.is_finite().then_some(v)
}

/// Per-axis polynomial extrapolation of a uniformly sampled history,
/// `horizon_s` past its last sample.
pub fn polyreg_predict(
    history: &[NormalizedPoint],
    step_s: f64,
    horizon_s: f64,
    degree: usize,
) -> Result<NormalizedPoint> {
    if history.len() < degree + 1 {
        return invalid(format!(
            "degree {degree} needs at least {} samples, got {}",
            degree + 1,
            history.len()
        ));
    }
    if !(step_s > 0.0) || !(horizon_s >= 0.0) {
        return invalid("step must be positive and horizon non-negative");
    }
    let n = history.len();
    // time in window lengths, last sample at 0, for conditioning
    let span = (n as f64) * step_s;
    let ts: Vec<f64> = (0..n).map(|i| (i as f64 - (n - 1) as f64) * step_s / span).collect();
    let at = horizon_s / span;
    let xs = unwrap_x(history);
    let ys: Vec<f64> = history.iter().map(|p| p.y).collect();
    let x = polyfit_eval(&ts, &xs, degree, at)
        .ok_or_else(|| Error::InvalidInput("polynomial fit failed".into()))?;
    let y = polyfit_eval(&ts, &ys, degree, at)
        .ok_or_else(|| Error::InvalidInput("polynomial fit failed".into()))?;
    Ok(NormalizedPoint::wrapped(x, y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecast {
    pub point: NormalizedPoint,
    /// The AR fit was unusable and linear extrapolation was used instead.
    pub fallback: bool,
}

fn linear_extrapolate(vs: &[f64], steps: usize) -> f64 {
    match vs {
        [] => 0.0,
        [v] => *v,
        [.., a, b] => b + steps as f64 * (b - a),
    }
}

/// Fits AR(order) with intercept and iterates it `steps` ahead. `None` when
/// the history is too short or the regression is rank-deficient.
fn ar_axis(vs: &[f64], steps: usize, order: usize) -> Option<f64> {
    let n = vs.len();
    if order == 0 || n < 3 * order {
        return None;
    }
    let last = vs[n - 1];
    let z: Vec<f64> = vs.iter().map(|v| v - last).collect();
    if z.iter().all(|&v| v == 0.0) {
        return Some(last);
    }
    let rows = n - order;
    let a = DMatrix::from_fn(rows, order + 1, |i, j| if j == 0 { 1.0 } else { z[i + order - j] });
    let b = DVector::from_iterator(rows, (0..rows).map(|i| z[i + order]));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || svd.rank(smax * 1e-10) < order + 1 {
        return None;
    }
    let coef = svd.solve(&b, smax * 1e-10).ok()?;
    let mut window: VecDeque<f64> = z[n - order..].iter().copied().collect();
    let mut next = 0.0;
    for _ in 0..steps {
        next = coef[0]
            + (1..=order)
                .map(|j| coef[j] * window[window.len() - j])
                .sum::<f64>();
        window.pop_front();
        window.push_back(next);
    }
    let v = if steps == 0 { 0.0 } else { next } + last;
    v.is_finite().then_some(v)
}

/// Autoregressive forecast per axis on seam-unwrapped coordinates.
pub fn ar_forecast(history: &[NormalizedPoint], horizon_steps: usize, order: usize) -> Result<Forecast> {
    if history.is_empty() {
        return invalid("cannot forecast an empty history");
    }
    let xs = unwrap_x(history);
    let ys: Vec<f64> = history.iter().map(|p| p.y).collect();
    let (x, y) = (ar_axis(&xs, horizon_steps, order), ar_axis(&ys, horizon_steps, order));
    let fallback = x.is_none() || y.is_none();
    let (x, y) = if fallback {
        (
            linear_extrapolate(&xs, horizon_steps),
            linear_extrapolate(&ys, horizon_steps),
        )
    } else {
        (x.unwrap_or_default(), y.unwrap_or_default())
    };
    Ok(Forecast {
        point: NormalizedPoint::wrapped(x, y),
        fallback,
    })
}

/// Predicts the head position from the head's own history.
pub trait HeadPredictor: Sync + Send {
    fn name(&self) -> &str;
    /// Samples of history consumed per prediction.
    fn history_len(&self) -> usize;
    fn predict(&self, history: &[NormalizedPoint], step_s: f64, horizon_s: f64) -> Result<NormalizedPoint>;
}

#[derive(Debug, Clone)]
pub struct PolyRegPredictor {
    pub degree: usize,
    pub window: usize,
}

impl Default for PolyRegPredictor {
    fn default() -> Self {
        Self {
            degree: 1,
            window: 120,
        }
    }
}

impl HeadPredictor for PolyRegPredictor {
    fn name(&self) -> &str {
        "polyreg"
    }

    fn history_len(&self) -> usize {
        self.window
    }

    fn predict(&self, history: &[NormalizedPoint], step_s: f64, horizon_s: f64) -> Result<NormalizedPoint> {
        let h = &history[history.len().saturating_sub(self.window)..];
        polyreg_predict(h, step_s, horizon_s, self.degree)
    }
}

/// AR forecaster over a sliding window; serves as the sequence-model
/// head predictor and as the gaze forecaster.
#[derive(Debug, Clone)]
pub struct ArPredictor {
    pub order: usize,
    pub window: usize,
}

impl Default for ArPredictor {
    fn default() -> Self {
        Self {
            order: 4,
            window: 120,
        }
    }
}

impl ArPredictor {
    pub fn forecast(&self, history: &[NormalizedPoint], steps: usize) -> Result<Forecast> {
        let h = &history[history.len().saturating_sub(self.window)..];
        ar_forecast(h, steps, self.order)
    }
}

impl HeadPredictor for ArPredictor {
    fn name(&self) -> &str {
        "ar"
    }

    fn history_len(&self) -> usize {
        self.window
    }

    fn predict(&self, history: &[NormalizedPoint], step_s: f64, horizon_s: f64) -> Result<NormalizedPoint> {
        let steps = (horizon_s / step_s).round() as usize;
        Ok(self.forecast(history, steps)?.point)
    }
}

// ---------------------------------------------------------------------------
// Passive-aggressive regression

/// Outcome of one online update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PaUpdate {
    /// Prediction already within the insensitivity margin.
    Passive,
    Updated { tau: f64 },
    /// Loss was positive but the feature vector was zero; nothing changed.
    ZeroFeatures,
}

/// PA-I regression model (bounded step size).
#[derive(Debug, Clone, PartialEq)]
pub struct PaModel {
    pub weights: Vec<f64>,
    pub epsilon: f64,
    /// Aggressiveness cap on each step.
    pub c: f64,
}

pub const DEFAULT_EPSILON: f64 = 0.005;
pub const DEFAULT_AGGRESSIVENESS: f64 = 1.0;

impl PaModel {
    pub fn new(weights: Vec<f64>, epsilon: f64, c: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return invalid(format!("epsilon must be non-negative, got {epsilon}"));
        }
        if !(c > 0.0) {
            return invalid(format!("aggressiveness must be positive, got {c}"));
        }
        if weights.is_empty() {
            return invalid("model needs at least one weight");
        }
        Ok(Self { weights, epsilon, c })
    }

    fn check(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.weights.len() {
            return invalid(format!(
                "{} features for {} weights",
                features.len(),
                self.weights.len()
            ));
        }
        Ok(())
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        self.check(features)?;
        Ok(self.weights.iter().zip(features).map(|(w, f)| w * f).sum())
    }

    /// ε-insensitive loss on one sample.
    pub fn loss(&self, features: &[f64], target: f64) -> Result<f64> {
        Ok(((self.predict(features)? - target).abs() - self.epsilon).max(0.0))
    }

    pub fn update(&mut self, features: &[f64], target: f64) -> Result<PaUpdate> {
        let y_hat = self.predict(features)?;
        let loss = ((y_hat - target).abs() - self.epsilon).max(0.0);
        if loss == 0.0 {
            return Ok(PaUpdate::Passive);
        }
        let norm2: f64 = features.iter().map(|f| f * f).sum();
        if norm2 == 0.0 {
            log::warn!("passive-aggressive update skipped: zero feature vector");
            return Ok(PaUpdate::ZeroFeatures);
        }
        let tau = self.c.min(loss / norm2);
        let sign = (target - y_hat).signum();
        for (w, f) in self.weights.iter_mut().zip(features) {
            *w += sign * tau * f;
        }
        Ok(PaUpdate::Updated { tau })
    }
}

/// Functional form of [`PaModel::update`].
pub fn pa_update(model: &PaModel, features: &[f64], target: f64) -> Result<(PaModel, PaUpdate)> {
    let mut m = model.clone();
    let status = m.update(features, target)?;
    Ok((m, status))
}

// ---------------------------------------------------------------------------
// Fusion

/// Displacements fed to the fusion models are divided by this, so that they
/// are of the same order as the constant bias feature.
pub const DEFAULT_FEATURE_SCALE: f64 = 0.1;

/// Feature vectors for the x and y fusion models,
/// `[1, gaze, head, object_1, …, object_n]`, each position expressed as its
/// displacement from `origin` (the latest observed head position) divided by
/// `scale`. x displacements cross the seam the short way.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionFeatures {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub origin: NormalizedPoint,
    pub head: NormalizedPoint,
    pub scale: f64,
}

pub fn fusion_features(
    origin: &NormalizedPoint,
    gaze_pred: &NormalizedPoint,
    head_pred: &NormalizedPoint,
    objects: &[NormalizedPoint],
    scale: f64,
) -> FusionFeatures {
    let dx = |p: &NormalizedPoint| wraparound_dx(origin.x, p.x) / scale;
    let dy = |p: &NormalizedPoint| (p.y - origin.y) / scale;
    let mut x = Vec::with_capacity(3 + objects.len());
    let mut y = Vec::with_capacity(3 + objects.len());
    x.extend([1.0, dx(gaze_pred), dx(head_pred)]);
    y.extend([1.0, dy(gaze_pred), dy(head_pred)]);
    for o in objects {
        x.push(dx(o));
        y.push(dy(o));
    }
    FusionFeatures {
        x,
        y,
        origin: *origin,
        head: *head_pred,
        scale,
    }
}

/// Pair of PA models for the x and y coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModels {
    pub x: PaModel,
    pub y: PaModel,
    pub scale: f64,
}

impl FusionModels {
    /// Starts as a pass-through of the head prediction. `epsilon` is in
    /// frame units.
    pub fn head_passthrough(num_objects: usize, epsilon: f64, c: f64) -> Result<Self> {
        let mut w = vec![0.0; 3 + num_objects];
        w[2] = 1.0;
        Self::with_weights(w.clone(), w, epsilon, c, DEFAULT_FEATURE_SCALE)
    }

    pub fn with_weights(wx: Vec<f64>, wy: Vec<f64>, epsilon: f64, c: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return invalid(format!("feature scale must be positive, got {scale}"));
        }
        if wx.len() != wy.len() {
            return invalid("x and y models must have the same length");
        }
        Ok(Self {
            x: PaModel::new(wx, epsilon / scale, c)?,
            y: PaModel::new(wy, epsilon / scale, c)?,
            scale,
        })
    }

    pub fn features(
        &self,
        origin: &NormalizedPoint,
        gaze_pred: &NormalizedPoint,
        head_pred: &NormalizedPoint,
        objects: &[NormalizedPoint],
    ) -> FusionFeatures {
        fusion_features(origin, gaze_pred, head_pred, objects, self.scale)
    }

    /// The fused point is written relative to the head prediction, so a
    /// head pass-through returns it unchanged.
    pub fn predict(&self, f: &FusionFeatures) -> Result<NormalizedPoint> {
        let x = self.x.predict(&f.x)? - f.x[2];
        let y = self.y.predict(&f.y)? - f.y[2];
        Ok(NormalizedPoint::wrapped(
            f.head.x + f.scale * x,
            f.head.y + f.scale * y,
        ))
    }

    pub fn update(&mut self, f: &FusionFeatures, truth: &NormalizedPoint) -> Result<(PaUpdate, PaUpdate)> {
        let tx = wraparound_dx(f.origin.x, truth.x) / f.scale;
        let ty = (truth.y - f.origin.y) / f.scale;
        let ux = self.x.update(&f.x, tx)?;
        let uy = self.y.update(&f.y, ty)?;
        Ok((ux, uy))
    }
}

/// Weighted combination of gaze, head and object positions into one FoV
/// center, relative to the current head position `origin`.
pub fn fuse_predict(
    models: &FusionModels,
    origin: &NormalizedPoint,
    gaze_pred: &NormalizedPoint,
    head_pred: &NormalizedPoint,
    objects: &[NormalizedPoint],
) -> Result<NormalizedPoint> {
    let expected = 3 + objects.len();
    if models.x.weights.len() != expected || models.y.weights.len() != expected {
        return invalid(format!(
            "fusion models need {expected} weights for {} objects",
            objects.len()
        ));
    }
    models.predict(&models.features(origin, gaze_pred, head_pred, objects))
}

/// Settings for gaze-assisted prediction.
#[derive(Debug, Clone)]
pub struct GazeAssist {
    pub horizon_s: f64,
    /// How far the head trails the gaze.
    pub lag_s: f64,
    pub forecaster: ArPredictor,
}

pub const DEFAULT_LAG_S: f64 = 0.12;

impl Default for GazeAssist {
    fn default() -> Self {
        Self {
            horizon_s: 1.0,
            lag_s: DEFAULT_LAG_S,
            forecaster: ArPredictor::default(),
        }
    }
}

/// Everything computed for one gaze-assisted prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct AssistedPrediction {
    pub point: NormalizedPoint,
    pub head: NormalizedPoint,
    pub gaze: NormalizedPoint,
    pub features: FusionFeatures,
    /// The gaze feature came from the forecaster rather than an observation.
    pub forecast_used: bool,
    pub forecast_fallback: bool,
}

fn index_at(trace: &Trace, t: f64) -> usize {
    let t0 = trace.samples[0].t;
    let i = ((t - t0) / trace.step()).round();
    (i.max(0.0) as usize).min(trace.samples.len() - 1)
}

/// One fused prediction at sample `now` for `horizon_s` ahead.
///
/// The gaze leads the head by `lag_s`: when the horizon is within the lag
/// the observed gaze at `now + horizon − lag` is used directly, otherwise
/// the gaze series is forecast up to that instant.
pub fn gaze_assisted_predict_at(
    trace: &Trace,
    now: usize,
    assist: &GazeAssist,
    head_predictor: &dyn HeadPredictor,
    models: &FusionModels,
    objects: &[NormalizedPoint],
) -> Result<AssistedPrediction> {
    if !(assist.lag_s >= 0.0) || !(assist.horizon_s >= 0.0) {
        return invalid("lag and horizon must be non-negative");
    }
    let need = head_predictor
        .history_len()
        .max(assist.forecaster.window)
        .max(1);
    if now >= trace.samples.len() || now + 1 < need {
        return invalid(format!(
            "prediction at sample {now} needs {need} samples of history"
        ));
    }
    let step = trace.step();
    let horizon_steps = (assist.horizon_s / step).round() as usize;
    let lag_steps = (assist.lag_s / step).round() as usize;
    let window = &trace.samples[now + 1 - need..=now];
    let heads: Vec<NormalizedPoint> = window.iter().map(|s| s.head).collect();
    let head = head_predictor.predict(&heads, step, assist.horizon_s)?;
    let (gaze, forecast_used, forecast_fallback) = if horizon_steps <= lag_steps {
        let back = lag_steps - horizon_steps;
        if back > now {
            return invalid("not enough gaze history for the lag");
        }
        (trace.samples[now - back].gaze, false, false)
    } else {
        let gazes: Vec<NormalizedPoint> = window.iter().map(|s| s.gaze).collect();
        let f = assist.forecaster.forecast(&gazes, horizon_steps - lag_steps)?;
        (f.point, true, f.fallback)
    };
    let features = models.features(&trace.samples[now].head, &gaze, &head, objects);
    let point = models.predict(&features)?;
    Ok(AssistedPrediction {
        point,
        head,
        gaze,
        features,
        forecast_used,
        forecast_fallback,
    })
}

/// Time-based form of [`gaze_assisted_predict_at`].
pub fn gaze_assisted_predict(
    trace: &Trace,
    t_now: f64,
    assist: &GazeAssist,
    head_predictor: &dyn HeadPredictor,
    models: &FusionModels,
    objects: &[ObjectTrack],
) -> Result<NormalizedPoint> {
    let now = index_at(trace, t_now);
    let objs = object_positions(objects, trace.samples[now].t);
    Ok(gaze_assisted_predict_at(trace, now, assist, head_predictor, models, &objs)?.point)
}

fn object_positions(objects: &[ObjectTrack], t: f64) -> Vec<NormalizedPoint> {
    objects
        .iter()
        .map(|o| o.at(t).unwrap_or(NormalizedPoint::CENTER))
        .collect()
}

/// Online fusion over one trace: predictions are queued with their features
/// and the models learn from each one when its ground truth arrives.
#[derive(Debug, Clone)]
pub struct OnlineFusion {
    pub models: FusionModels,
    /// When false the models stay frozen.
    pub learn: bool,
    pending: VecDeque<(usize, FusionFeatures)>,
}

impl OnlineFusion {
    pub fn new(models: FusionModels) -> Self {
        Self {
            models,
            learn: true,
            pending: VecDeque::new(),
        }
    }

    /// Feeds the truths available at sample `now` into the models.
    pub fn observe(&mut self, trace: &Trace, now: usize) -> Result<()> {
        while let Some((target, _)) = self.pending.front() {
            if *target > now {
                break;
            }
            let (target, f) = self.pending.pop_front().expect("front exists");
            if self.learn {
                self.models.update(&f, &trace.samples[target].head)?;
            }
        }
        Ok(())
    }

    pub fn step(
        &mut self,
        trace: &Trace,
        now: usize,
        assist: &GazeAssist,
        head_predictor: &dyn HeadPredictor,
        objects: &[NormalizedPoint],
    ) -> Result<AssistedPrediction> {
        self.observe(trace, now)?;
        let p = gaze_assisted_predict_at(trace, now, assist, head_predictor, &self.models, objects)?;
        let target = now + (assist.horizon_s / trace.step()).round() as usize;
        self.pending.push_back((target, p.features.clone()));
        Ok(p)
    }
}

// ---------------------------------------------------------------------------
// Benchmark

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mode {
    HeadOnly,
    GazeAssisted,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::HeadOnly => "head-only",
            Mode::GazeAssisted => "gaze-assisted",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub grid: TileGrid,
    pub assist: GazeAssist,
    /// Predict every `stride` samples.
    pub stride: usize,
    pub epsilon: f64,
    pub c: f64,
    pub feature_scale: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            grid: TileGrid::default(),
            assist: GazeAssist::default(),
            stride: 6,
            epsilon: DEFAULT_EPSILON,
            c: DEFAULT_AGGRESSIVENESS,
            feature_scale: DEFAULT_FEATURE_SCALE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub predictor: String,
    pub mode: Mode,
    pub report: MetricReport,
    /// Present on gaze-assisted rows, relative to the matching head-only row.
    pub improvement: Option<Improvement>,
    pub records: Vec<PredictionRecord>,
}

/// Head-only and gaze-assisted records for one trace and one predictor.
pub fn predict_trace(
    trace: &Trace,
    predictor: &dyn HeadPredictor,
    config: &BenchmarkConfig,
    objects: &[ObjectTrack],
) -> Result<(Vec<PredictionRecord>, Vec<PredictionRecord>)> {
    let step = trace.step();
    let horizon_steps = (config.assist.horizon_s / step).round() as usize;
    let start = predictor.history_len().max(config.assist.forecaster.window).max(1) - 1;
    let n = trace.samples.len();
    let mut w = vec![0.0; 3 + objects.len()];
    w[2] = 1.0;
    let models = FusionModels::with_weights(w.clone(), w, config.epsilon, config.c, config.feature_scale)?;
    let mut online = OnlineFusion::new(models);
    let (mut head_only, mut assisted) = (Vec::new(), Vec::new());
    let mut now = start;
    while now + horizon_steps < n {
        let objs = object_positions(objects, trace.samples[now].t);
        let p = online.step(trace, now, &config.assist, predictor, &objs)?;
        let target = &trace.samples[now + horizon_steps];
        head_only.push(PredictionRecord {
            t: target.t,
            predicted: p.head,
            truth: target.head,
        });
        assisted.push(PredictionRecord {
            t: target.t,
            predicted: p.point,
            truth: target.head,
        });
        now += config.stride.max(1);
    }
    Ok((head_only, assisted))
}

/// Evaluates every predictor head-only and gaze-assisted across the corpus.
/// Traces are processed in parallel, each with its own fusion models; records
/// are pooled in corpus order.
pub fn run_benchmark(
    traces: &[Trace],
    predictors: &[Box<dyn HeadPredictor>],
    config: &BenchmarkConfig,
    objects: &BTreeMap<String, Vec<ObjectTrack>>,
) -> Result<Vec<BenchmarkRow>> {
    if traces.is_empty() {
        return invalid("benchmark needs at least one trace");
    }
    let mut rows = Vec::new();
    for predictor in predictors {
        let per_trace = par::map(traces, |tr| {
            let objs = objects.get(&tr.video_id).map(Vec::as_slice).unwrap_or(&[]);
            predict_trace(tr, predictor.as_ref(), config, objs)
        });
        let (mut ho, mut ga) = (Vec::new(), Vec::new());
        for r in per_trace {
            let (h, g) = r?;
            ho.extend(h);
            ga.extend(g);
        }
        let ho_report = evaluate(&ho, &config.grid)?;
        let ga_report = evaluate(&ga, &config.grid)?;
        rows.push(BenchmarkRow {
            predictor: predictor.name().to_owned(),
            mode: Mode::HeadOnly,
            report: ho_report,
            improvement: None,
            records: ho,
        });
        rows.push(BenchmarkRow {
            predictor: predictor.name().to_owned(),
            mode: Mode::GazeAssisted,
            report: ga_report,
            improvement: Some(Improvement::between(&ho_report, &ga_report)),
            records: ga,
        });
    }
    Ok(rows)
}

/// `predictor,mode,euclidean,manhattan,tile_accuracy,improvement_pct`, where
/// the improvement is the relative reduction of the Euclidean distance.
pub fn write_benchmark_csv<W: Write>(rows: &[BenchmarkRow], mut out: W) -> Result<()> {
    writeln!(out, "predictor,mode,euclidean,manhattan,tile_accuracy,improvement_pct")?;
    for r in rows {
        let imp = r
            .improvement
            .map(|i| format!("{:.3}", i.euclidean_pct))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{}",
            r.predictor, r.mode, r.report.euclidean, r.report.manhattan, r.report.tile_accuracy, imp
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Tile prefetch

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefetchStats {
    pub hit_ratio: f64,
    /// Mean fraction of the grid fetched per prediction.
    pub fetched_fraction: f64,
}

/// Fetches every tile within Chebyshev distance `halfwidth` of the predicted
/// tile (columns wrap, rows clamp) and checks whether the true tile is among
/// them.
pub fn simulate_tile_prefetch(
    records: &[PredictionRecord],
    g: &TileGrid,
    halfwidth: usize,
) -> PrefetchStats {
    if records.is_empty() {
        return PrefetchStats {
            hit_ratio: 0.0,
            fetched_fraction: 0.0,
        };
    }
    let wrap = TileGrid {
        wrap_columns: true,
        ..*g
    };
    let (mut hits, mut fetched) = (0usize, 0usize);
    for r in records {
        let p = tile_of(&r.predicted, g);
        let t = tile_of(&r.truth, g);
        let row_lo = p.row.saturating_sub(halfwidth);
        let row_hi = (p.row + halfwidth).min(g.rows - 1);
        let cols = (2 * halfwidth + 1).min(g.cols);
        fetched += (row_hi - row_lo + 1) * cols;
        if (row_lo..=row_hi).contains(&t.row) && wrap.col_distance(p.col, t.col) <= halfwidth {
            hits += 1;
        }
    }
    let n = records.len() as f64;
    PrefetchStats {
        hit_ratio: hits as f64 / n,
        fetched_fraction: fetched as f64 / (n * g.tile_count() as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthesize_trace, SynthParams};
    use crate::geo::wrap_unit;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64) -> NormalizedPoint {
        NormalizedPoint { x, y }
    }

    #[test]
    fn tile_examples() {
        let g = TileGrid::default();
        assert_eq!(tile_of(&p(0.0, 0.0), &g), TileIndex { row: 0, col: 0 });
        assert_eq!(tile_of(&p(0.49, 0.49), &g), TileIndex { row: 3, col: 3 });
        assert_eq!(tile_of(&p(0.51, 0.51), &g), TileIndex { row: 4, col: 4 });
        assert_eq!(tile_of(&p(0.3, 1.0), &g).row, 7);
        assert_eq!("8x8".parse::<TileGrid>().unwrap(), g);
        assert!("8".parse::<TileGrid>().is_err());
        assert!("0x3".parse::<TileGrid>().is_err());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(unified_euclidean(&p(0.2, 0.3), &p(0.2, 0.3)), 0.0);
        assert_abs_diff_eq!(unified_euclidean(&p(0.99, 0.5), &p(0.01, 0.5)), 0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(unified_euclidean(&p(0.0, 0.0), &p(0.3, 0.4)), 0.5, epsilon = 1e-12);

        let g = TileGrid::default();
        assert_eq!(manhattan_tile_distance(&p(0.1, 0.1), &p(0.11, 0.12), &g), 0);
        assert_eq!(manhattan_tile_distance(&p(0.49, 0.49), &p(0.51, 0.51), &g), 2);
        assert_eq!(manhattan_tile_distance(&p(0.01, 0.5), &p(0.99, 0.5), &g), 1);
        let strict = TileGrid {
            wrap_columns: false,
            ..g
        };
        assert_eq!(manhattan_tile_distance(&p(0.01, 0.5), &p(0.99, 0.5), &strict), 7);
    }

    #[test]
    fn evaluate_examples() {
        let g = TileGrid::default();
        let exact: Vec<_> = (0..5)
            .map(|i| PredictionRecord {
                t: i as f64,
                predicted: p(0.1 * i as f64, 0.5),
                truth: p(0.1 * i as f64, 0.5),
            })
            .collect();
        let r = evaluate(&exact, &g).unwrap();
        assert_eq!((r.euclidean, r.manhattan, r.tile_accuracy, r.count), (0.0, 0.0, 1.0, 5));
        let seam = [PredictionRecord {
            t: 0.0,
            predicted: p(0.99, 0.5),
            truth: p(0.01, 0.5),
        }];
        assert_abs_diff_eq!(evaluate(&seam, &g).unwrap().euclidean, 0.02, epsilon = 1e-12);
        assert!(evaluate(&[], &g).is_err());
    }

    proptest! {
        #[test]
        fn euclidean_is_a_cylinder_metric(
            a in (0.0f64..1.0, 0.0f64..=1.0), b in (0.0f64..1.0, 0.0f64..=1.0), c in (0.0f64..1.0, 0.0f64..=1.0)
        ) {
            let (a, b, c) = (p(a.0, a.1), p(b.0, b.1), p(c.0, c.1));
            prop_assert_eq!(unified_euclidean(&a, &a), 0.0);
            prop_assert!((unified_euclidean(&a, &b) - unified_euclidean(&b, &a)).abs() < 1e-12);
            prop_assert!(unified_euclidean(&a, &c) <= unified_euclidean(&a, &b) + unified_euclidean(&b, &c) + 1e-12);
        }

        #[test]
        fn tiles_partition_the_frame(x in 0.0f64..1.0, y in 0.0f64..=1.0, rows in 1usize..20, cols in 1usize..20) {
            let g = TileGrid::new(rows, cols).unwrap();
            let t = tile_of(&p(x, y), &g);
            prop_assert!(t.row < rows && t.col < cols);
            let (r0, r1) = (t.row as f64 / rows as f64, (t.row + 1) as f64 / rows as f64);
            prop_assert!(y >= r0 && (y < r1 || (t.row == rows - 1 && y <= 1.0)));
        }
    }

    #[test]
    fn polyreg_examples() {
        let constant = vec![p(0.3, 0.6); 10];
        let out = polyreg_predict(&constant, 0.1, 2.0, 2).unwrap();
        assert_abs_diff_eq!(out.x, 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(out.y, 0.6, epsilon = 1e-9);

        let ramp: Vec<_> = (0..10).map(|i| p(0.1 * i as f64 * 0.1, 0.5)).collect();
        let out = polyreg_predict(&ramp, 0.1, 0.1, 1).unwrap();
        assert_abs_diff_eq!(out.x, 0.1, epsilon = 1e-9);

        let seam = [p(0.98, 0.5), p(0.99, 0.5), p(0.0, 0.5), p(0.01, 0.5)];
        let out = polyreg_predict(&seam, 1.0, 1.0, 1).unwrap();
        assert_abs_diff_eq!(out.x, 0.02, epsilon = 1e-9);

        assert!(polyreg_predict(&seam[..2], 1.0, 1.0, 2).is_err());
        let falling: Vec<_> = (0..5).map(|i| p(0.5, 0.1 - 0.02 * i as f64)).collect();
        assert_eq!(polyreg_predict(&falling, 1.0, 10.0, 1).unwrap().y, 0.0);
    }

    #[test]
    fn ar_examples() {
        let constant = vec![p(0.4, 0.7); 30];
        let f = ar_forecast(&constant, 5, 2).unwrap();
        assert_abs_diff_eq!(f.point.x, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(f.point.y, 0.7, epsilon = 1e-12);

        let ramp: Vec<_> = (0..40).map(|i| p(wrap_unit(0.9 + 0.003 * i as f64), 0.5)).collect();
        for steps in 1..5 {
            let f = ar_forecast(&ramp, steps, 2).unwrap();
            let want = wrap_unit(0.9 + 0.003 * (39 + steps) as f64);
            assert!(wraparound_dx(f.point.x, want).abs() < 1e-9 * steps as f64, "{steps}");
        }
        let f = ar_forecast(&ramp, 3, 1).unwrap();
        assert!(!f.fallback);
        assert!(wraparound_dx(f.point.x, wrap_unit(0.9 + 0.003 * 42.0)).abs() < 1e-9);

        let short = vec![p(0.1, 0.1), p(0.2, 0.2)];
        let f = ar_forecast(&short, 1, 4).unwrap();
        assert!(f.fallback);
        assert_abs_diff_eq!(f.point.x, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn ar_reproduces_sinusoid() {
        let w = 0.15f64;
        let series: Vec<_> = (0..200)
            .map(|i| p(0.5 + 0.2 * (w * i as f64).sin(), 0.5 + 0.1 * (w * i as f64 + 1.0).cos()))
            .collect();
        for end in [40usize, 100, 199] {
            let f = ar_forecast(&series[..end], 1, 2).unwrap();
            assert!(!f.fallback);
            let want = series[end.min(199)];
            if end < 200 && end != 199 {
                assert!((f.point.x - want.x).abs() < 1e-6);
                assert!((f.point.y - want.y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn pa_examples() {
        let mut m = PaModel::new(vec![0.0, 0.0], 0.1, 1.0).unwrap();
        assert_eq!(m.update(&[1.0, 1.0], 1.0).unwrap(), PaUpdate::Updated { tau: 0.45 });
        assert_eq!(m.weights, vec![0.45, 0.45]);

        let mut m = PaModel::new(vec![0.5, 0.5], 0.1, 1.0).unwrap();
        assert_eq!(m.update(&[1.0, 1.0], 1.05).unwrap(), PaUpdate::Passive);
        assert_eq!(m.weights, vec![0.5, 0.5]);

        let mut m = PaModel::new(vec![1.0], 0.0, 1.0).unwrap();
        assert_eq!(m.update(&[0.0], 2.0).unwrap(), PaUpdate::ZeroFeatures);
        assert!(m.update(&[1.0, 2.0], 0.0).is_err());
        assert!(PaModel::new(vec![1.0], -1.0, 1.0).is_err());
        assert!(PaModel::new(vec![1.0], 0.0, 0.0).is_err());

        let (m2, _) = pa_update(&PaModel::new(vec![0.0, 0.0], 0.1, 1.0).unwrap(), &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(m2.weights, vec![0.45, 0.45]);
    }

    proptest! {
        #[test]
        fn pa_never_increases_loss(
            w in prop::collection::vec(-2.0f64..2.0, 3),
            f in prop::collection::vec(-2.0f64..2.0, 3),
            target in -3.0f64..3.0, eps in 0.0f64..0.5, c in 0.01f64..5.0,
        ) {
            let mut m = PaModel::new(w, eps, c).unwrap();
            let before = m.loss(&f, target).unwrap();
            m.update(&f, target).unwrap();
            prop_assert!(m.loss(&f, target).unwrap() <= before + 1e-12);
        }

        #[test]
        fn pa_infinite_margin_is_identity(w in prop::collection::vec(-2.0f64..2.0, 4), f in prop::collection::vec(-2.0f64..2.0, 4), t in -5.0f64..5.0) {
            let mut m = PaModel::new(w.clone(), f64::INFINITY, 1.0).unwrap();
            prop_assert_eq!(m.update(&f, t).unwrap(), PaUpdate::Passive);
            prop_assert_eq!(m.weights, w);
        }
    }

    #[test]
    fn fusion_passthrough() {
        let origin = p(0.01, 0.55);
        let gaze = p(0.98, 0.3);
        let head = p(0.03, 0.6);
        let objs = [p(0.5, 0.5)];
        let mh = FusionModels::head_passthrough(1, 0.0, 1.0).unwrap();
        assert_eq!(fuse_predict(&mh, &origin, &gaze, &head, &objs).unwrap(), head);
        let mut w = vec![0.0; 4];
        w[1] = 1.0;
        let mg = FusionModels::with_weights(w.clone(), w, 0.0, 1.0, DEFAULT_FEATURE_SCALE).unwrap();
        let out = fuse_predict(&mg, &origin, &gaze, &head, &objs).unwrap();
        assert!(wraparound_dx(out.x, gaze.x).abs() < 1e-12);
        assert_abs_diff_eq!(out.y, gaze.y, epsilon = 1e-12);
        assert!(fuse_predict(&mg, &origin, &gaze, &head, &[]).is_err());
        assert!(FusionModels::with_weights(vec![0.0; 3], vec![0.0; 3], 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn fusion_learns_to_trust_gaze() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut models = FusionModels::head_passthrough(0, DEFAULT_EPSILON, DEFAULT_AGGRESSIVENESS).unwrap();
        // gaze is the truth; the head prediction is off by up to 0.05
        let sample = |rng: &mut ChaCha8Rng| {
            let origin = p(rng.random(), rng.random_range(0.2..0.8));
            let truth = NormalizedPoint::wrapped(
                origin.x + rng.random_range(-0.05..0.05),
                origin.y + rng.random_range(-0.05..0.05),
            );
            let head = NormalizedPoint::wrapped(
                truth.x + rng.random_range(-0.05..0.05),
                truth.y + rng.random_range(-0.05..0.05),
            );
            (origin, truth, head)
        };
        for _ in 0..500 {
            let (origin, truth, head) = sample(&mut rng);
            let f = models.features(&origin, &truth, &head, &[]);
            models.update(&f, &truth).unwrap();
        }
        assert!(models.x.weights[1].abs() > models.x.weights[2].abs());
        assert!(models.y.weights[1].abs() > models.y.weights[2].abs());
        let (mut fused, mut head_only) = (0.0, 0.0);
        for _ in 0..200 {
            let (origin, truth, head) = sample(&mut rng);
            let out = fuse_predict(&models, &origin, &truth, &head, &[]).unwrap();
            fused += unified_euclidean(&out, &truth);
            head_only += unified_euclidean(&head, &truth);
        }
        assert!(fused < head_only);
    }

    fn planted(seed: u64, sigma: f64) -> Trace {
        synthesize_trace(&SynthParams {
            seed,
            duration_s: 10.0,
            lag_samples: 14,
            noise_sigma: sigma,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn horizon_equal_to_lag_reads_future_head_from_gaze() {
        let tr = planted(1, 0.0);
        let assist = GazeAssist {
            horizon_s: 14.0 / 120.0,
            lag_s: 14.0 / 120.0,
            ..Default::default()
        };
        let pred = PolyRegPredictor::default();
        let mut gaze_models = FusionModels::head_passthrough(0, 0.0, 1.0).unwrap();
        gaze_models.x.weights = vec![0.0, 1.0, 0.0];
        gaze_models.y.weights = vec![0.0, 1.0, 0.0];
        for now in [200usize, 500, 900] {
            let out = gaze_assisted_predict_at(&tr, now, &assist, &pred, &gaze_models, &[]).unwrap();
            assert!(!out.forecast_used);
            assert_eq!(out.gaze, tr.samples[now + 14].head);
            assert!(unified_euclidean(&out.point, &tr.samples[now + 14].head) < 1e-12);
        }
    }

    #[test]
    fn long_horizon_invokes_forecaster_for_remaining_time() {
        let tr = planted(2, 0.0);
        let assist = GazeAssist {
            horizon_s: 1.0,
            lag_s: 14.0 / 120.0,
            ..Default::default()
        };
        let models = FusionModels::head_passthrough(0, DEFAULT_EPSILON, 1.0).unwrap();
        let pred = PolyRegPredictor::default();
        let now = 300;
        let out = gaze_assisted_predict_at(&tr, now, &assist, &pred, &models, &[]).unwrap();
        assert!(out.forecast_used);
        let window: Vec<_> = tr.samples[now + 1 - 120..=now].iter().map(|s| s.gaze).collect();
        // 1 s − 14 samples = 106 forecast steps at 120 Hz
        let direct = assist.forecaster.forecast(&window, 106).unwrap();
        assert_eq!(out.gaze, direct.point);
    }

    #[test]
    fn per_user_lag_override() {
        let tr = planted(3, 0.0);
        let pred = PolyRegPredictor::default();
        let models = FusionModels::head_passthrough(0, DEFAULT_EPSILON, 1.0).unwrap();
        for lag_s in [0.08, 0.2] {
            let assist = GazeAssist {
                horizon_s: 0.05,
                lag_s,
                ..Default::default()
            };
            let now = 400;
            let out = gaze_assisted_predict_at(&tr, now, &assist, &pred, &models, &[]).unwrap();
            let back = ((lag_s - 0.05) * 120.0f64).round() as usize;
            assert_eq!(out.gaze, tr.samples[now - back].gaze);
        }
        let t_now = tr.samples[400].t;
        let via_time = gaze_assisted_predict(&tr, t_now, &GazeAssist::default(), &pred, &models, &[]).unwrap();
        let via_index =
            gaze_assisted_predict_at(&tr, 400, &GazeAssist::default(), &pred, &models, &[]).unwrap();
        assert_eq!(via_time, via_index.point);
        assert!(gaze_assisted_predict_at(&tr, 10, &GazeAssist::default(), &pred, &models, &[]).is_err());
    }

    #[test]
    fn frozen_head_passthrough_matches_head_only() {
        let tr = planted(4, 0.01);
        let config = BenchmarkConfig::default();
        for predictor in [
            Box::new(PolyRegPredictor::default()) as Box<dyn HeadPredictor>,
            Box::new(ArPredictor::default()),
        ] {
            let mut online = OnlineFusion::new(FusionModels::head_passthrough(0, 0.005, 1.0).unwrap());
            online.learn = false;
            let mut now = 119;
            while now + 120 < tr.len() {
                let pr = online.step(&tr, now, &config.assist, predictor.as_ref(), &[]).unwrap();
                let head = predictor
                    .predict(
                        &tr.samples[now + 1 - predictor.history_len()..=now]
                            .iter()
                            .map(|s| s.head)
                            .collect::<Vec<_>>(),
                        tr.step(),
                        1.0,
                    )
                    .unwrap();
                assert_eq!(pr.point, head);
                now += 7;
            }
        }
    }

    #[test]
    fn benchmark_is_deterministic_and_gaze_helps() {
        let traces: Vec<Trace> = (0..3).map(|s| planted(s, 0.01)).collect();
        let predictors: Vec<Box<dyn HeadPredictor>> = vec![Box::new(PolyRegPredictor::default())];
        let config = BenchmarkConfig {
            assist: GazeAssist {
                horizon_s: DEFAULT_LAG_S,
                ..Default::default()
            },
            ..Default::default()
        };
        let a = run_benchmark(&traces, &predictors, &config, &BTreeMap::new()).unwrap();
        let b = run_benchmark(&traces, &predictors, &config, &BTreeMap::new()).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_benchmark_csv(&a, &mut ca).unwrap();
        write_benchmark_csv(&b, &mut cb).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(a.len(), 2);
        assert!(a[1].report.euclidean < a[0].report.euclidean);
        assert!(run_benchmark(&[], &predictors, &config, &BTreeMap::new()).is_err());
    }

    #[test]
    fn prefetch_examples() {
        let g = TileGrid::default();
        let rec = |x: f64, y: f64, tx: f64, ty: f64| PredictionRecord {
            t: 0.0,
            predicted: p(x, y),
            truth: p(tx, ty),
        };
        let perfect = [rec(0.3, 0.3, 0.3, 0.3), rec(0.7, 0.6, 0.7, 0.6)];
        let s = simulate_tile_prefetch(&perfect, &g, 0);
        assert_eq!((s.hit_ratio, s.fetched_fraction), (1.0, 1.0 / 64.0));
        let wild = [rec(0.0, 0.0, 0.9, 0.9)];
        let s = simulate_tile_prefetch(&wild, &g, 8);
        assert_eq!((s.hit_ratio, s.fetched_fraction), (1.0, 1.0));
        let s = simulate_tile_prefetch(&perfect, &g, 1);
        assert_eq!(s.fetched_fraction, 9.0 / 64.0);
        // column wraparound at the seam
        let seam = [rec(0.01, 0.5, 0.99, 0.5)];
        assert_eq!(simulate_tile_prefetch(&seam, &g, 1).hit_ratio, 1.0);
        assert_eq!(simulate_tile_prefetch(&seam, &g, 0).hit_ratio, 0.0);
    }
}

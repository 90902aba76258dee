//! Objective per-video metrics: spherical quality, camera motion and ROI
//! dispersion, plus corpus normalization and 3×3 classification.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::data::{MotionCell, RoiCell};
use crate::error::{invalid, Error, Result};
use crate::frame::FrameGray;
use crate::geo::{self, wrap_unit, wraparound_dx, CubeFaceId, NormalizedPoint};
use crate::par;

// ---------------------------------------------------------------------------
// Quality

/// Per-row spherical area weights of an equirectangular frame.
pub fn ws_row_weights(height: usize) -> Vec<f64> {
    let h = height as f64;
    (0..height)
        .map(|j| ((j as f64 + 0.5 - h / 2.0) * PI / h).cos())
        .collect()
}

/// Full row-major weight matrix; every column of a row carries the same weight.
pub fn ws_weights(width: usize, height: usize) -> Vec<f64> {
    ws_row_weights(height)
        .into_iter()
        .flat_map(|w| std::iter::repeat_n(w, width))
        .collect()
}

fn check_pair(a: &FrameGray, b: &FrameGray) -> Result<()> {
    if a.width != b.width || a.height != b.height {
        return invalid(format!(
            "frame size mismatch: {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        ));
    }
    if a.bit_depth != b.bit_depth {
        return invalid(format!(
            "bit depth mismatch: {} vs {}",
            a.bit_depth, b.bit_depth
        ));
    }
    Ok(())
}

/// Spherically weighted mean squared error.
pub fn wmse(reference: &FrameGray, test: &FrameGray) -> Result<f64> {
    check_pair(reference, test)?;
    let w = reference.width;
    let weights = ws_row_weights(reference.height);
    let row_sums = par::map_range(reference.height, |j| {
        let a = &reference.values[j * w..(j + 1) * w];
        let b = &test.values[j * w..(j + 1) * w];
        let sq: f64 = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| {
                let d = f64::from(x) - f64::from(y);
                d * d
            })
            .sum();
        weights[j] * sq
    });
    let num: f64 = row_sums.iter().sum();
    let den: f64 = weights.iter().sum::<f64>() * w as f64;
    Ok(num / den)
}

fn psnr_from_mse(mse: f64, bit_depth: u8) -> f64 {
    if mse == 0.0 {
        return f64::INFINITY;
    }
    let max = f64::from((1u32 << bit_depth) - 1);
    10.0 * (max * max / mse).log10()
}

/// WS-PSNR in dB; identical frames give `f64::INFINITY`.
pub fn ws_psnr(reference: &FrameGray, test: &FrameGray) -> Result<f64> {
    let m = wmse(reference, test)?;
    Ok(psnr_from_mse(m, reference.bit_depth))
}

/// Sequence WS-PSNR: per-frame WMSE averaged, then converted once.
pub fn video_quality(reference: &[FrameGray], test: &[FrameGray]) -> Result<f64> {
    if reference.is_empty() {
        return invalid("quality needs at least one frame");
    }
    if reference.len() != test.len() {
        return invalid(format!(
            "sequence lengths differ: {} vs {}",
            reference.len(),
            test.len()
        ));
    }
    let pairs: Vec<(&FrameGray, &FrameGray)> = reference.iter().zip(test).collect();
    let per_frame = par::map(&pairs, |(a, b)| wmse(a, b));
    let mut total = 0.0;
    for m in per_frame {
        total += m?;
    }
    Ok(psnr_from_mse(
        total / reference.len() as f64,
        reference[0].bit_depth,
    ))
}

// ---------------------------------------------------------------------------
// Camera motion

/// Translation (face-size units per frame) and rotation (radians per frame).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionTuple {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
    pub ox: f64,
    pub oy: f64,
    pub oz: f64,
}

impl MotionTuple {
    pub fn as_array(&self) -> [f64; 6] {
        [self.mx, self.my, self.mz, self.ox, self.oy, self.oz]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            mx: a[0],
            my: a[1],
            mz: a[2],
            ox: a[3],
            oy: a[4],
            oz: a[5],
        }
    }
}

/// Estimates the motion between two consecutive views of one cube face.
pub trait MotionEstimator: Sync {
    fn estimate(&self, a: &FrameGray, b: &FrameGray) -> Result<MotionTuple>;
}

/// Classical estimator: whole-face phase correlation for in-plane
/// translation, a scale search on the central crop for the forward axis.
/// Rotations are always reported as zero.
#[derive(Debug, Clone)]
pub struct PhaseCorrelation {
    /// Normalized correlation peak below which no translation is reported.
    pub min_peak: f64,
    /// Log-scale step and half-count of the zoom search.
    pub scale_step: f64,
    pub scale_steps: i32,
}

impl Default for PhaseCorrelation {
    fn default() -> Self {
        Self {
            min_peak: 0.1,
            scale_step: 0.02,
            scale_steps: 10,
        }
    }
}

struct Fft2 {
    w: usize,
    h: usize,
    row: Arc<dyn Fft<f64>>,
    col: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(w: usize, h: usize, inverse: bool) -> Self {
        let mut planner = FftPlanner::new();
        let (row, col) = if inverse {
            (planner.plan_fft_inverse(w), planner.plan_fft_inverse(h))
        } else {
            (planner.plan_fft_forward(w), planner.plan_fft_forward(h))
        };
        Self { w, h, row, col }
    }

    fn process(&self, data: &mut [Complex<f64>]) {
        for r in data.chunks_exact_mut(self.w) {
            self.row.process(r);
        }
        let mut column = vec![Complex::default(); self.h];
        for c in 0..self.w {
            for r in 0..self.h {
                column[r] = data[r * self.w + c];
            }
            self.col.process(&mut column);
            for r in 0..self.h {
                data[r * self.w + c] = column[r];
            }
        }
    }
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * (i as f64 + 0.5) / n as f64).cos())
        .collect()
}

/// Offset of a parabola's vertex through three samples, in (−0.5, 0.5).
fn parabolic(l: f64, c: f64, r: f64) -> f64 {
    let den = l - 2.0 * c + r;
    if den.abs() < 1e-12 {
        0.0
    } else {
        (0.5 * (l - r) / den).clamp(-0.5, 0.5)
    }
}

impl PhaseCorrelation {
    /// Shift `(dx, dy)` in pixels such that `b(p) ≈ a(p − d)`, and the peak.
    pub fn translation(&self, a: &FrameGray, b: &FrameGray) -> (f64, f64, f64) {
        let (w, h) = (a.width, a.height);
        let (wx, wy) = (hann(w), hann(h));
        let mean = |f: &FrameGray| f.values.iter().map(|&v| f64::from(v)).sum::<f64>() / (w * h) as f64;
        let load = |f: &FrameGray| -> Vec<Complex<f64>> {
            let m = mean(f);
            f.values
                .iter()
                .enumerate()
                .map(|(i, &v)| Complex::new((f64::from(v) - m) * wx[i % w] * wy[i / w], 0.0))
                .collect()
        };
        let fwd = Fft2::new(w, h, false);
        let inv = Fft2::new(w, h, true);
        let mut fa = load(a);
        let mut fb = load(b);
        fwd.process(&mut fa);
        fwd.process(&mut fb);
        let mut cross: Vec<Complex<f64>> = fb
            .iter()
            .zip(&fa)
            .map(|(&x, &y)| {
                let p = x * y.conj();
                let n = p.norm();
                if n > 1e-12 {
                    p / n
                } else {
                    Complex::default()
                }
            })
            .collect();
        inv.process(&mut cross);
        let scale = 1.0 / (w * h) as f64;
        let surface: Vec<f64> = cross.iter().map(|c| c.re * scale).collect();
        let (best, peak) = surface
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |acc, (i, &v)| {
                if v > acc.1 {
                    (i, v)
                } else {
                    acc
                }
            });
        let (px, py) = (best % w, best / w);
        let at = |x: isize, y: isize| {
            surface[(y.rem_euclid(h as isize) as usize) * w + x.rem_euclid(w as isize) as usize]
        };
        let (ix, iy) = (px as isize, py as isize);
        let sx = parabolic(at(ix - 1, iy), at(ix, iy), at(ix + 1, iy));
        let sy = parabolic(at(ix, iy - 1), at(ix, iy), at(ix, iy + 1));
        let signed = |p: usize, n: usize| {
            if p > n / 2 {
                p as f64 - n as f64
            } else {
                p as f64
            }
        };
        (signed(px, w) + sx, signed(py, h) + sy, peak)
    }

    /// Log of the zoom factor that best maps `a` onto `b` around the center.
    pub fn log_scale(&self, a: &FrameGray, b: &FrameGray) -> f64 {
        let (w, h) = (a.width as f64, a.height as f64);
        let (cx, cy) = (w / 2.0, h / 2.0);
        let (x0, x1) = (a.width / 4, 3 * a.width / 4);
        let (y0, y1) = (a.height / 4, 3 * a.height / 4);
        let mut best: (f64, f64) = (0.0, f64::INFINITY);
        for k in -self.scale_steps..=self.scale_steps {
            let ls = k as f64 * self.scale_step;
            let s = ls.exp();
            let mut err = 0.0;
            for r in y0..y1 {
                for c in x0..x1 {
                    let px = cx + (c as f64 + 0.5 - cx) / s;
                    let py = cy + (r as f64 + 0.5 - cy) / s;
                    let d = a.sample_wrapped(px, py) - f64::from(b.get(c, r));
                    err += d * d;
                }
            }
            // near-ties go to the smaller zoom
            let tol = if best.1.is_finite() { 1e-9 * best.1.max(1.0) } else { 0.0 };
            if err < best.1 - tol || (err <= best.1 + tol && ls.abs() < best.0.abs()) {
                best = (ls, err);
            }
        }
        best.0
    }
}

impl MotionEstimator for PhaseCorrelation {
    fn estimate(&self, a: &FrameGray, b: &FrameGray) -> Result<MotionTuple> {
        check_pair(a, b)?;
        if a.width != a.height {
            return invalid(format!("face must be square, got {}x{}", a.width, a.height));
        }
        let size = a.width as f64;
        let (dx, dy, peak) = self.translation(a, b);
        let (mx, my) = if peak >= self.min_peak {
            (dx / size, dy / size)
        } else {
            (0.0, 0.0)
        };
        Ok(MotionTuple {
            mx,
            my,
            mz: self.log_scale(a, b),
            ..Default::default()
        })
    }
}

pub fn estimate_face_motion(a: &FrameGray, b: &FrameGray) -> Result<MotionTuple> {
    PhaseCorrelation::default().estimate(a, b)
}

/// Component-wise mean over the six faces.
pub fn aggregate_camera_motion(faces: &[MotionTuple]) -> Result<MotionTuple> {
    if faces.len() != 6 {
        return invalid(format!("expected 6 face motions, got {}", faces.len()));
    }
    let mut acc = [0.0; 6];
    for f in faces {
        for (a, v) in acc.iter_mut().zip(f.as_array()) {
            *a += v;
        }
    }
    Ok(MotionTuple::from_array(acc.map(|v| v / 6.0)))
}

pub fn motion_magnitude(m: &MotionTuple) -> f64 {
    m.as_array().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Mean per-frame camera-motion magnitude of an equirectangular sequence.
///
/// Each frame is split into six cube faces; consecutive faces are compared
/// with `estimator` and the six results averaged. A single frame has no
/// motion.
pub fn video_motion(
    frames: &[FrameGray],
    face_size: usize,
    estimator: &dyn MotionEstimator,
) -> Result<f64> {
    if frames.is_empty() {
        return invalid("motion needs at least one frame");
    }
    if frames.len() == 1 {
        return Ok(0.0);
    }
    let faces = par::map(frames, |f| {
        CubeFaceId::ALL
            .iter()
            .map(|&face| geo::equirect_to_cubeface(f, face, face_size))
            .collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let per_pair = par::map_range(frames.len() - 1, |i| -> Result<f64> {
        let tuples = (0..6)
            .map(|k| estimator.estimate(&faces[i][k], &faces[i + 1][k]))
            .collect::<Result<Vec<_>>>()?;
        Ok(motion_magnitude(&aggregate_camera_motion(&tuples)?))
    });
    let mut total = 0.0;
    for m in per_pair {
        total += m?;
    }
    Ok(total / (frames.len() - 1) as f64)
}

// ---------------------------------------------------------------------------
// ROI dispersion

#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl SaliencyMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return invalid("saliency dimensions do not match the value count");
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return invalid("saliency values must be finite and non-negative");
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_frame(f: &FrameGray) -> Self {
        Self {
            width: f.width,
            height: f.height,
            values: f.values.iter().map(|&v| f64::from(v)).collect(),
        }
    }

    /// Reads a comma-separated matrix, one image row per line.
    pub fn from_csv<R: Read>(source: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(source);
        let mut values = Vec::new();
        let mut width = None;
        let mut height = 0;
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if *width.get_or_insert(rec.len()) != rec.len() {
                return Err(Error::Parse {
                    line,
                    message: "ragged saliency row".into(),
                });
            }
            for f in rec.iter() {
                values.push(f.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad saliency value {f:?}"),
                })?);
            }
            height += 1;
        }
        Self::new(width.unwrap_or(0), height, values)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let is_csv = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv {
            Self::from_csv(std::fs::File::open(path)?)
        } else {
            Ok(Self::from_frame(&crate::frame::read_pgm_file(path)?))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Roi {
    pub center: NormalizedPoint,
    /// Area in pixels.
    pub weight: f64,
}

pub type RoiSet = Vec<Roi>;

/// Peak-anchored ROIs: repeatedly take the highest remaining pixel above the
/// map mean and flood its connected region of values ≥ mean (4-neighbour,
/// columns wrap). The region's pixel count is the weight and its
/// value-weighted centroid the center.
pub fn extract_rois(map: &SaliencyMap) -> Result<RoiSet> {
    let (w, h) = (map.width, map.height);
    let n = w * h;
    let mean = map.values.iter().sum::<f64>() / n as f64;
    if mean <= 0.0 {
        return invalid("saliency map has no positive value");
    }
    let stop = mean * (1.0 + 1e-6);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| map.values[b].total_cmp(&map.values[a]).then(a.cmp(&b)));
    let mut taken = vec![false; n];
    let mut rois = Vec::new();
    let mut queue = VecDeque::new();
    for &seed in &order {
        if map.values[seed] <= stop {
            break;
        }
        if taken[seed] {
            continue;
        }
        // BFS carrying unwrapped column positions relative to the seed
        let (sc, sr) = ((seed % w) as isize, (seed / w) as isize);
        taken[seed] = true;
        queue.push_back((sc, sr));
        let (mut count, mut mass, mut sx, mut sy) = (0usize, 0.0, 0.0, 0.0);
        while let Some((c, r)) = queue.pop_front() {
            let idx = r as usize * w + c.rem_euclid(w as isize) as usize;
            let v = map.values[idx];
            count += 1;
            mass += v;
            sx += v * (c as f64 + 0.5);
            sy += v * (r as f64 + 0.5);
            for (dc, dr) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                let (nc, nr) = (c + dc, r + dr);
                if nr < 0 || nr >= h as isize {
                    continue;
                }
                let nidx = nr as usize * w + nc.rem_euclid(w as isize) as usize;
                if !taken[nidx] && map.values[nidx] >= mean {
                    taken[nidx] = true;
                    queue.push_back((nc, nr));
                }
            }
        }
        rois.push(Roi {
            center: NormalizedPoint {
                x: wrap_unit(sx / mass / w as f64),
                y: (sy / mass / h as f64).clamp(0.0, 1.0),
            },
            weight: count as f64,
        });
    }
    if rois.is_empty() {
        // constant map: one ROI covering everything
        let (mut mass, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for (i, &v) in map.values.iter().enumerate() {
            mass += v;
            sx += v * ((i % w) as f64 + 0.5);
            sy += v * ((i / w) as f64 + 0.5);
        }
        rois.push(Roi {
            center: NormalizedPoint {
                x: wrap_unit(sx / mass / w as f64),
                y: sy / mass / h as f64,
            },
            weight: n as f64,
        });
    }
    Ok(rois)
}

/// Weighted mean center on the periodic x axis: the point minimizing the
/// weighted sum of squared wraparound distances. Returns `(mean, variance)`.
fn periodic_weighted_mean(xs: &[(f64, f64)]) -> (f64, f64) {
    let mut pts: Vec<(f64, f64)> = xs.iter().map(|&(x, w)| (wrap_unit(x), w)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pts.iter().map(|p| p.1).sum();
    let mut best = (0.0, f64::INFINITY);
    // The optimal center's antipode falls between two sorted neighbours, so
    // one of these unwrappings matches the periodic optimum exactly.
    for start in 0..pts.len() {
        let base = pts[start].0;
        let unwrapped = |k: usize| {
            let (x, w) = pts[(start + k) % pts.len()];
            (if x < base { x + 1.0 } else { x }, w)
        };
        let mean = (0..pts.len())
            .map(|k| {
                let (x, w) = unwrapped(k);
                w * x
            })
            .sum::<f64>()
            / total;
        let var = (0..pts.len())
            .map(|k| {
                let (x, w) = unwrapped(k);
                w * (x - mean).powi(2)
            })
            .sum::<f64>()
            / total;
        if var < best.1 - 1e-15 {
            best = (wrap_unit(mean), var);
        }
    }
    best
}

/// Weighted mean center and standard distance of a set of ROIs.
pub fn roi_mean_and_dispersion(rois: &[Roi]) -> Result<(NormalizedPoint, f64)> {
    if rois.is_empty() {
        return invalid("dispersion needs at least one ROI");
    }
    if rois.iter().any(|r| !(r.weight > 0.0)) {
        return invalid("ROI weights must be positive");
    }
    let total: f64 = rois.iter().map(|r| r.weight).sum();
    let xs: Vec<(f64, f64)> = rois.iter().map(|r| (r.center.x, r.weight)).collect();
    let (mean_x, var_x) = periodic_weighted_mean(&xs);
    let mean_y = rois.iter().map(|r| r.weight * r.center.y).sum::<f64>() / total;
    let var_y = rois
        .iter()
        .map(|r| r.weight * (r.center.y - mean_y).powi(2))
        .sum::<f64>()
        / total;
    // recompute the x term from the chosen center with wraparound deltas
    let var_x_check = rois
        .iter()
        .map(|r| r.weight * wraparound_dx(mean_x, r.center.x).powi(2))
        .sum::<f64>()
        / total;
    debug_assert!((var_x - var_x_check).abs() < 1e-9);
    Ok((
        NormalizedPoint {
            x: mean_x,
            y: mean_y,
        },
        (var_x_check + var_y).sqrt(),
    ))
}

pub fn roi_dispersion(rois: &[Roi]) -> Result<f64> {
    roi_mean_and_dispersion(rois).map(|(_, sd)| sd)
}

// ---------------------------------------------------------------------------
// Corpus normalization and classification

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxonomyVector {
    pub quality_db: f64,
    pub motion_mag: f64,
    pub roi_sd: f64,
    /// (quality, motion, roi) scaled into (0, 1) across a corpus.
    pub normalized: Option<[f64; 3]>,
}

impl TaxonomyVector {
    pub fn new(quality_db: f64, motion_mag: f64, roi_sd: f64) -> Self {
        Self {
            quality_db,
            motion_mag,
            roi_sd,
            normalized: None,
        }
    }
}

const NORM_EPS: f64 = 1e-6;

fn min_max_open(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo == 0.0 {
        return vec![0.5; values.len()];
    }
    values
        .iter()
        .map(|v| (v - lo + NORM_EPS) / (hi - lo + 2.0 * NORM_EPS))
        .collect()
}

/// Min-max scales each metric into the open interval (0, 1). Infinite
/// quality (lossless) is first clamped to the best finite value + 1 dB.
pub fn normalize_corpus(vectors: &[TaxonomyVector]) -> Result<Vec<TaxonomyVector>> {
    if vectors.is_empty() {
        return invalid("cannot normalize an empty corpus");
    }
    if vectors
        .iter()
        .any(|v| v.motion_mag.is_nan() || !v.motion_mag.is_finite() || !v.roi_sd.is_finite() || v.quality_db.is_nan())
    {
        return invalid("taxonomy metrics must be finite");
    }
    let finite_max = vectors
        .iter()
        .map(|v| v.quality_db)
        .filter(|q| q.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let cap = if finite_max.is_finite() {
        finite_max + 1.0
    } else {
        // every video lossless: identical values, the degenerate rule applies
        0.0
    };
    let quality: Vec<f64> = vectors
        .iter()
        .map(|v| if v.quality_db.is_finite() { v.quality_db } else { cap })
        .collect();
    let motion: Vec<f64> = vectors.iter().map(|v| v.motion_mag).collect();
    let roi: Vec<f64> = vectors.iter().map(|v| v.roi_sd).collect();
    let (q, m, r) = (min_max_open(&quality), min_max_open(&motion), min_max_open(&roi));
    Ok(vectors
        .iter()
        .enumerate()
        .map(|(i, v)| TaxonomyVector {
            normalized: Some([q[i], m[i], r[i]]),
            ..*v
        })
        .collect())
}

/// Two increasing cut points inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cuts(pub f64, pub f64);

impl Default for Cuts {
    fn default() -> Self {
        Cuts(1.0 / 3.0, 2.0 / 3.0)
    }
}

impl Cuts {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.0 && self.0 < self.1 && self.1 < 1.0) {
            return invalid(format!(
                "cuts must satisfy 0 < a < b < 1, got ({}, {})",
                self.0, self.1
            ));
        }
        Ok(())
    }

    /// 0, 1 or 2; a value on a cut goes to the higher bin.
    fn bin(&self, v: f64) -> usize {
        if v < self.0 {
            0
        } else if v < self.1 {
            1
        } else {
            2
        }
    }
}

pub fn classify_video(
    v: &TaxonomyVector,
    motion_cuts: Cuts,
    roi_cuts: Cuts,
) -> Result<(MotionCell, RoiCell)> {
    motion_cuts.validate()?;
    roi_cuts.validate()?;
    let [_, motion, roi] = v
        .normalized
        .ok_or_else(|| Error::InvalidInput("classification needs a normalized vector".into()))?;
    let motion_cell = match motion_cuts.bin(motion) {
        0 => MotionCell::Motionless,
        1 => MotionCell::Middle,
        _ => MotionCell::Moving,
    };
    let roi_cell = match roi_cuts.bin(roi) {
        0 => RoiCell::Intensive,
        1 => RoiCell::Middle,
        _ => RoiCell::Disperse,
    };
    Ok((motion_cell, roi_cell))
}

//! Behaviour analytics over head/gaze traces: density maps, exploration
//! histograms, relative eye-direction heatmaps and the head–gaze lag sweep.

use std::io::Write;
use std::path::Path;

use crate::data::{resample_trace, Channel, Sample, Trace};
use crate::error::{invalid, Result};
use crate::frame::{write_pgm_file, FrameGray};
use crate::geo::{wraparound_dx, NormalizedPoint};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1D {
    pub axis: Axis,
    pub counts: Vec<u64>,
}

impl Histogram1D {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts divided by the total.
    pub fn density(&self) -> Vec<f64> {
        let t = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    pub fn modal_bin(&self) -> usize {
        self.counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map_or(0, |(i, _)| i)
    }

    /// Fraction of mass in the outer `fraction` of the axis (split evenly
    /// between both ends).
    pub fn tail_mass(&self, fraction: f64) -> f64 {
        let n = self.counts.len();
        let per_side = ((fraction / 2.0) * n as f64).round() as usize;
        let tail: u64 = self.counts[..per_side].iter().sum::<u64>()
            + self.counts[n - per_side..].iter().sum::<u64>();
        tail as f64 / self.total().max(1) as f64
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin,lo,hi,count,density")?;
        let n = self.counts.len() as f64;
        for (i, (c, d)) in self.counts.iter().zip(self.density()).enumerate() {
            writeln!(
                out,
                "{i},{:.6},{:.6},{c},{:.9}",
                i as f64 / n,
                (i + 1) as f64 / n,
                d
            )?;
        }
        Ok(())
    }
}

/// Counts over a rectangle, row-major with row 0 at the low end of y.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap2D {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub bins_x: usize,
    pub bins_y: usize,
    pub counts: Vec<u64>,
    /// Samples that fell outside the ranges.
    pub overflow: u64,
}

impl Heatmap2D {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), bins_x: usize, bins_y: usize) -> Self {
        Self {
            x_range,
            y_range,
            bins_x,
            bins_y,
            counts: vec![0; bins_x * bins_y],
            overflow: 0,
        }
    }

    #[inline]
    pub fn get(&self, bx: usize, by: usize) -> u64 {
        self.counts[by * self.bins_x + bx]
    }

    /// Bin of `v` in `[lo, hi]` split into `n`; the upper edge joins the last bin.
    fn bin_of(v: f64, (lo, hi): (f64, f64), n: usize) -> Option<usize> {
        if !(v >= lo && v <= hi) {
            return None;
        }
        Some((((v - lo) / (hi - lo)) * n as f64).floor().min((n - 1) as f64) as usize)
    }

    pub fn bin_for(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        Some((
            Self::bin_of(x, self.x_range, self.bins_x)?,
            Self::bin_of(y, self.y_range, self.bins_y)?,
        ))
    }

    pub fn add(&mut self, x: f64, y: f64) {
        match self.bin_for(x, y) {
            Some((bx, by)) => self.counts[by * self.bins_x + bx] += 1,
            None => self.overflow += 1,
        }
    }

    pub fn in_range_total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.in_range_total() + self.overflow
    }

    /// Adds another heatmap with the same layout.
    pub fn merge(&mut self, other: &Heatmap2D) {
        debug_assert_eq!((self.bins_x, self.bins_y), (other.bins_x, other.bins_y));
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for by in 0..self.bins_y {
            let row: Vec<String> = (0..self.bins_x).map(|bx| self.get(bx, by).to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// 8-bit image, maximum count mapped to 255.
    pub fn to_pgm(&self) -> FrameGray {
        let max = self.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let values = self
            .counts
            .iter()
            .map(|&c| (c as f64 * 255.0 / max).round() as u16)
            .collect();
        FrameGray::new(self.bins_x, self.bins_y, 8, values).expect("heatmap dimensions are valid")
    }

    pub fn write_files(&self, csv_path: &Path, pgm_path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
        self.write_csv(&mut f)?;
        f.flush()?;
        write_pgm_file(&self.to_pgm(), pgm_path)
    }
}

fn point_of(s: &Sample, channel: Channel) -> NormalizedPoint {
    match channel {
        Channel::Head => s.head,
        Channel::Gaze => s.gaze,
    }
}

fn merge_all(parts: Vec<Heatmap2D>, template: Heatmap2D) -> Heatmap2D {
    parts.iter().fold(template, |mut acc, h| {
        acc.merge(h);
        acc
    })
}

/// Where on the frame one channel points, binned over [0,1)×[0,1].
pub fn density_map(
    traces: &[Trace],
    channel: Channel,
    bins_x: usize,
    bins_y: usize,
) -> Result<Heatmap2D> {
    if traces.is_empty() {
        return invalid("density map needs at least one trace");
    }
    if bins_x == 0 || bins_y == 0 {
        return invalid("bin counts must be positive");
    }
    let template = Heatmap2D::new((0.0, 1.0), (0.0, 1.0), bins_x, bins_y);
    let parts = par::map(traces, |tr| {
        let mut h = template.clone();
        for s in &tr.samples {
            let p = point_of(s, channel);
            h.add(p.x, p.y);
        }
        h
    });
    Ok(merge_all(parts, template))
}

/// Marginal distribution of head positions along one axis.
pub fn exploration_histogram(traces: &[Trace], axis: Axis, bins: usize) -> Result<Histogram1D> {
    if traces.is_empty() || traces.iter().all(|t| t.samples.is_empty()) {
        return invalid("exploration histogram needs samples");
    }
    if bins == 0 {
        return invalid("bin count must be positive");
    }
    let parts = par::map(traces, |tr| {
        let mut counts = vec![0u64; bins];
        for s in &tr.samples {
            let v = match axis {
                Axis::Horizontal => s.head.x,
                Axis::Vertical => s.head.y,
            };
            let b = ((v * bins as f64).floor().max(0.0) as usize).min(bins - 1);
            counts[b] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; bins];
    for p in parts {
        for (a, b) in counts.iter_mut().zip(p) {
            *a += b;
        }
    }
    Ok(Histogram1D { axis, counts })
}

/// Gaze position relative to the head direction, binned over
/// `[−half_range, half_range]²`; dx crosses the seam the short way.
pub fn relative_gaze_heatmap(traces: &[Trace], half_range: f64, bins: usize) -> Result<Heatmap2D> {
    if traces.is_empty() {
        return invalid("relative heatmap needs at least one trace");
    }
    if !(half_range > 0.0 && half_range <= 0.5) {
        return invalid(format!("half range must be in (0, 0.5], got {half_range}"));
    }
    if bins == 0 {
        return invalid("bin count must be positive");
    }
    let r = (-half_range, half_range);
    let template = Heatmap2D::new(r, r, bins, bins);
    let parts = par::map(traces, |tr| {
        let mut h = template.clone();
        for s in &tr.samples {
            h.add(wraparound_dx(s.head.x, s.gaze.x), s.gaze.y - s.head.y);
        }
        h
    });
    Ok(merge_all(parts, template))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagSweepResult {
    /// 0..=max_shift.
    pub shifts: Vec<usize>,
    pub mse: Vec<f64>,
    pub best_shift: usize,
}

impl LagSweepResult {
    fn from_mse(mse: Vec<f64>) -> Self {
        // first minimum wins ties
        let best_shift = mse
            .iter()
            .enumerate()
            .fold((0usize, f64::INFINITY), |acc, (k, &m)| if m < acc.1 { (k, m) } else { acc })
            .0;
        Self {
            shifts: (0..mse.len()).collect(),
            mse,
            best_shift,
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W, freq_hz: f64) -> Result<()> {
        writeln!(out, "shift,seconds,mse")?;
        for (k, m) in self.shifts.iter().zip(&self.mse) {
            writeln!(out, "{k},{:.6},{:.12e}", *k as f64 / freq_hz, m)?;
        }
        Ok(())
    }
}

#[inline]
fn sq_dist(a: &NormalizedPoint, b: &NormalizedPoint) -> f64 {
    let dx = wraparound_dx(a.x, b.x);
    let dy = a.y - b.y;
    dx * dx + dy * dy
}

/// Mean squared head–gaze distance with the head read `k` samples after the
/// gaze, for every k in `0..=max_shift`. Each shift is averaged over its own
/// overlap.
pub fn lag_mse_sweep(trace: &Trace, max_shift: usize) -> Result<LagSweepResult> {
    let n = trace.samples.len();
    if n <= max_shift + 1 {
        return invalid(format!(
            "trace of {n} samples is too short for shifts up to {max_shift}"
        ));
    }
    if !trace.is_uniform(1e-2) {
        return invalid("lag sweep needs uniformly sampled traces; resample first");
    }
    let s = &trace.samples;
    let mse = par::map_range(max_shift + 1, |k| {
        let overlap = n - k;
        let total: f64 = (0..overlap).map(|i| sq_dist(&s[i + k].head, &s[i].gaze)).sum();
        total / overlap as f64
    });
    Ok(LagSweepResult::from_mse(mse))
}

/// Per-shift mean across traces (each trace weighted equally).
pub fn aggregate_lag_sweeps(results: &[LagSweepResult]) -> Result<LagSweepResult> {
    let first = results
        .first()
        .ok_or_else(|| crate::Error::InvalidInput("no sweeps to aggregate".into()))?;
    let len = first.mse.len();
    if results.iter().any(|r| r.mse.len() != len) {
        return invalid("sweeps cover different shift ranges");
    }
    let mse = (0..len)
        .map(|k| results.iter().map(|r| r.mse[k]).sum::<f64>() / results.len() as f64)
        .collect();
    Ok(LagSweepResult::from_mse(mse))
}

pub fn optimal_lag_seconds(result: &LagSweepResult, freq_hz: f64) -> f64 {
    result.best_shift as f64 / freq_hz
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub head: NormalizedPoint,
    pub gaze: NormalizedPoint,
}

/// Uniform subsample for plotting (10 points per second is the usual choice).
pub fn trajectory_export(trace: &Trace, points_per_second: usize) -> Result<Vec<TrajectoryPoint>> {
    if points_per_second == 0 {
        return invalid("points per second must be at least 1");
    }
    let r = resample_trace(trace, points_per_second as f64)?;
    Ok(r.samples
        .iter()
        .map(|s| TrajectoryPoint {
            t: s.t,
            head: s.head,
            gaze: s.gaze,
        })
        .collect())
}

pub fn write_trajectory_csv<W: Write>(points: &[TrajectoryPoint], mut out: W) -> Result<()> {
    writeln!(out, "t,head_x,head_y,gaze_x,gaze_y")?;
    for p in points {
        writeln!(
            out,
            "{:.6},{:.9},{:.9},{:.9},{:.9}",
            p.t, p.head.x, p.head.y, p.gaze.x, p.gaze.y
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthesize_trace, SynthParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn trace_of(points: &[(NormalizedPoint, NormalizedPoint)]) -> Trace {
        let samples = points
            .iter()
            .enumerate()
            .map(|(i, &(head, gaze))| Sample {
                t: i as f64 / 120.0,
                head,
                gaze,
            })
            .collect();
        Trace::new("v", "u", 120.0, samples).unwrap()
    }

    fn p(x: f64, y: f64) -> NormalizedPoint {
        NormalizedPoint { x, y }
    }

    #[test]
    fn density_examples() {
        let tr = trace_of(&[(p(0.5, 0.5), p(0.1, 0.1)), (p(0.0, 0.0), p(0.9, 1.0))]);
        let h = density_map(std::slice::from_ref(&tr), Channel::Head, 2, 2).unwrap();
        assert_eq!(h.get(1, 1), 1);
        assert_eq!(h.get(0, 0), 1);
        assert_eq!(h.total(), 2);
        let g = density_map(&[tr], Channel::Gaze, 2, 2).unwrap();
        // y = 1.0 joins the bottom row
        assert_eq!(g.get(1, 1), 1);
        assert!(density_map(&[], Channel::Head, 2, 2).is_err());
    }

    #[test]
    fn density_of_uniform_samples_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<_> = (0..100_000)
            .map(|_| {
                let q = p(rng.random(), rng.random());
                (q, q)
            })
            .collect();
        let h = density_map(&[trace_of(&pts)], Channel::Head, 8, 8).unwrap();
        let max = *h.counts.iter().max().unwrap() as f64;
        let min = *h.counts.iter().min().unwrap() as f64;
        assert_eq!(h.total(), 100_000);
        assert!(max / min < 2.0);
    }

    #[test]
    fn exploration_examples() {
        let tr = trace_of(&[(p(0.5, 0.2), p(0.5, 0.2)); 10]);
        let h = exploration_histogram(&[tr], Axis::Horizontal, 10).unwrap();
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.total(), 10);
        assert!(exploration_histogram(&[], Axis::Vertical, 4).is_err());
    }

    /// Centre-biased corpus with a wider horizontal spread than vertical.
    fn biased_corpus(seed: u64) -> Vec<Trace> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nx = Normal::new(0.5, 0.2).unwrap();
        let ny = Normal::new(0.5, 0.08).unwrap();
        (0..5)
            .map(|_| {
                let pts: Vec<_> = (0..2000)
                    .map(|_| {
                        let q = NormalizedPoint::wrapped(nx.sample(&mut rng), ny.sample(&mut rng));
                        (q, q)
                    })
                    .collect();
                trace_of(&pts)
            })
            .collect()
    }

    #[test]
    fn exploration_centre_bias_and_horizontal_spread() {
        let corpus = biased_corpus(17);
        // 9 bins put 0.5 strictly inside bin 4
        let hx = exploration_histogram(&corpus, Axis::Horizontal, 9).unwrap();
        let hy = exploration_histogram(&corpus, Axis::Vertical, 9).unwrap();
        assert_eq!(hx.modal_bin(), 4);
        assert_eq!(hy.modal_bin(), 4);
        assert!(hx.tail_mass(0.3) > hy.tail_mass(0.3));
        assert_eq!(hx.total(), 10_000);
    }

    #[test]
    fn relative_heatmap_examples() {
        let same = trace_of(&[(p(0.3, 0.4), p(0.3, 0.4)); 5]);
        let h = relative_gaze_heatmap(&[same], 0.2, 5).unwrap();
        assert_eq!(h.get(2, 2), 5);
        assert_eq!(h.in_range_total(), 5);

        let off = trace_of(&[(p(0.3, 0.4), p(0.35, 0.4)); 5]);
        let h = relative_gaze_heatmap(&[off], 0.2, 8).unwrap();
        let (bx, by) = h.bin_for(0.05, 0.0).unwrap();
        assert_eq!(h.get(bx, by), 5);

        let seam = trace_of(&[(p(0.99, 0.5), p(0.01, 0.5)); 3]);
        let h = relative_gaze_heatmap(&[seam], 0.1, 10).unwrap();
        let (bx, by) = h.bin_for(0.02, 0.0).unwrap();
        assert_eq!(h.get(bx, by), 3);
        assert_eq!(h.overflow, 0);

        let far = trace_of(&[(p(0.1, 0.1), p(0.6, 0.9)); 2]);
        let h = relative_gaze_heatmap(&[far], 0.2, 4).unwrap();
        assert_eq!((h.in_range_total(), h.overflow), (0, 2));

        assert!(relative_gaze_heatmap(&[], 0.2, 4).is_err());
        let one = trace_of(&[(p(0.1, 0.1), p(0.1, 0.1)); 2]);
        assert!(relative_gaze_heatmap(&[one], 0.6, 4).is_err());
    }

    #[test]
    fn relative_heatmap_rotation_invariant() {
        let tr = synthesize_trace(&SynthParams {
            seed: 4,
            duration_s: 5.0,
            noise_sigma: 0.01,
            ..Default::default()
        })
        .unwrap();
        let mut rotated = tr.clone();
        for s in &mut rotated.samples {
            s.head.x = crate::geo::wrap_unit(s.head.x + 0.37);
            s.gaze.x = crate::geo::wrap_unit(s.gaze.x + 0.37);
        }
        let a = relative_gaze_heatmap(&[tr], 0.2, 9).unwrap();
        let b = relative_gaze_heatmap(&[rotated], 0.2, 9).unwrap();
        // bin edges can flip by an ulp after the rotation
        let diff: u64 = a.counts.iter().zip(&b.counts).map(|(x, y)| x.abs_diff(*y)).sum();
        assert!(diff <= 2, "{diff}");
        assert_eq!(a.total(), b.total());
    }

    fn planted(lag: usize, sigma: f64, seed: u64) -> Trace {
        synthesize_trace(&SynthParams {
            seed,
            duration_s: 20.0,
            lag_samples: lag,
            noise_sigma: sigma,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn lag_sweep_recovers_planted_lag() {
        let r = lag_mse_sweep(&planted(14, 0.0, 1), 30).unwrap();
        assert_eq!(r.best_shift, 14);
        assert_eq!(r.mse[14], 0.0);
        let r = lag_mse_sweep(&planted(5, 0.005, 2), 30).unwrap();
        assert_eq!(r.best_shift, 5);
    }

    #[test]
    fn lag_sweep_monotone_without_lag() {
        let r = lag_mse_sweep(&planted(0, 0.0, 3), 30).unwrap();
        assert_eq!(r.best_shift, 0);
        assert!(r.mse.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn lag_sweep_shift_direction_identity() {
        // shifting gaze forward == shifting head backward on the overlap
        let tr = planted(9, 0.01, 5);
        let r = lag_mse_sweep(&tr, 20).unwrap();
        let s = &tr.samples;
        for k in 0..=20 {
            let n = s.len() - k;
            let head_back: Vec<_> = s[k..].iter().map(|x| x.head).collect();
            let gaze_cut: Vec<_> = s[..n].iter().map(|x| x.gaze).collect();
            let m = head_back
                .iter()
                .zip(&gaze_cut)
                .map(|(h, g)| sq_dist(h, g))
                .sum::<f64>()
                / n as f64;
            assert_eq!(m, r.mse[k]);
        }
    }

    #[test]
    fn lag_sweep_errors() {
        let tr = planted(0, 0.0, 1);
        let short = Trace::new("v", "u", 120.0, tr.samples[..10].to_vec()).unwrap();
        assert!(lag_mse_sweep(&short, 9).is_err());
        let mut uneven = tr.clone();
        uneven.samples.remove(50);
        uneven.samples.remove(80);
        assert!(lag_mse_sweep(&uneven, 10).is_err());
    }

    #[test]
    fn lag_seconds() {
        let mk = |k: usize| LagSweepResult::from_mse((0..40).map(|i| (i as f64 - k as f64).abs()).collect());
        assert!((optimal_lag_seconds(&mk(14), 120.0) - 0.116_666_7).abs() < 1e-6);
        assert_eq!(optimal_lag_seconds(&mk(0), 120.0), 0.0);
        assert!((optimal_lag_seconds(&mk(24), 120.0) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn aggregated_sweep() {
        let a = lag_mse_sweep(&planted(14, 0.0, 1), 30).unwrap();
        let b = lag_mse_sweep(&planted(14, 0.0, 2), 30).unwrap();
        let agg = aggregate_lag_sweeps(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(agg.best_shift, 14);
        assert_eq!(agg.mse[3], (a.mse[3] + b.mse[3]) / 2.0);
        assert!(aggregate_lag_sweeps(&[]).is_err());
    }

    #[test]
    fn trajectory_rows() {
        let tr = planted(0, 0.0, 1);
        let tr60 = synthesize_trace(&SynthParams {
            duration_s: 60.0,
            lag_samples: 0,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(trajectory_export(&tr60, 10).unwrap().len(), 600);
        let same = trajectory_export(&tr, 120).unwrap();
        assert_eq!(same.len(), tr.len());
        assert!(same.iter().zip(&tr.samples).all(|(a, b)| a.head == b.head && a.gaze == b.gaze));
        assert!(same.windows(2).all(|w| w[1].t > w[0].t));
        assert!(trajectory_export(&tr, 0).is_err());
    }

    #[test]
    fn conservation_with_overflow() {
        let tr = planted(3, 0.05, 8);
        for half in [0.01, 0.05, 0.2, 0.5] {
            let h = relative_gaze_heatmap(&[tr.clone(), tr.clone()], half, 7).unwrap();
            assert_eq!(h.total(), 2 * tr.len() as u64);
        }
    }
}

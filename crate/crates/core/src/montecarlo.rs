//! Ensemble sampling W = H₁ + iμH₂, histogram estimators and Monte Carlo
//! oracles for the analytic results.
//!
//! Every sampler splits the requested draws into fixed blocks of
//! [`BLOCK_SIZE`]; block `k` draws from `stream.substream(k)`. Blocks run on
//! the current rayon pool and are reduced in block order, so results depend
//! on the seed and stream but never on the number of worker threads.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{level_density, KernelSet};
use crate::linalg::{sample_gue, singular_values, ComplexMatrix, RngStream};
use crate::quadrature::{integrate_finite, QuadratureSpec};

pub const BLOCK_SIZE: usize = 4096;

/// Mean and standard error of a Monte Carlo average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Streaming mean/variance with an order-fixed merge.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Self) {
        if o.count == 0 {
            return;
        }
        let n = self.count + o.count;
        let d = o.mean - self.mean;
        self.mean += d * o.count as f64 / n as f64;
        self.m2 += o.m2 + d * d * self.count as f64 * o.count as f64 / n as f64;
        self.count = n;
    }

    pub fn estimate(&self) -> Estimate {
        let se = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
        } else {
            0.0
        };
        Estimate { mean: self.mean, std_error: se }
    }
}

/// Runs `samples` draws in fixed blocks and returns the per-block results
/// in block order.
pub(crate) fn run_blocks<T, F>(samples: usize, stream: &RngStream, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha20Rng, usize) -> T + Sync,
{
    let nblocks = samples.div_ceil(BLOCK_SIZE);
    (0..nblocks)
        .into_par_iter()
        .map(|k| {
            let count = BLOCK_SIZE.min(samples - k * BLOCK_SIZE);
            let mut rng = stream.substream(k as u64).rng();
            f(&mut rng, count)
        })
        .collect()
}

/// Mean of `f` over `samples` draws.
pub(crate) fn mc_mean<F>(samples: usize, stream: &RngStream, f: F) -> Estimate
where
    F: Fn(&mut rand_chacha::ChaCha20Rng) -> f64 + Sync,
{
    let parts = run_blocks(samples, stream, |rng, count| {
        let mut s = RunningStats::default();
        for _ in 0..count {
            s.push(f(rng));
        }
        s
    });
    let mut total = RunningStats::default();
    for p in &parts {
        total.merge(p);
    }
    total.estimate()
}

/// One draw of the singular values of an N × N matrix from the ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSample {
    /// Ascending, nonnegative.
    pub singular_values: Vec<f64>,
    #[serde(skip)]
    pub stream: RngStream,
}

impl AsRef<[f64]> for SpectrumSample {
    fn as_ref(&self) -> &[f64] {
        &self.singular_values
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("sampling needs mu in [0, 1] (got {mu})")));
    }
    Ok(())
}

/// W = H₁ + iμH₂ with independent GUE matrices of density ∝ exp(−Tr H²/2).
pub fn sample_w<R: Rng>(n: usize, mu: f64, rng: &mut R) -> ComplexMatrix {
    let h1 = sample_gue(n, rng);
    let h2 = sample_gue(n, rng);
    h1.add(&h2.scale(Complex64::new(0.0, mu)))
}

/// Ascending singular values of one draw of W.
pub fn draw_singular_values<R: Rng>(n: usize, mu: f64, rng: &mut R) -> Vec<f64> {
    singular_values(&sample_w(n, mu, rng)).expect("W is square")
}

/// A single draw from the stream's first block position.
pub fn sample_spectrum(n: usize, mu: f64, stream: &RngStream) -> Result<SpectrumSample> {
    if n == 0 {
        return Err(Error::InvalidArgument("sampling needs N >= 1".into()));
    }
    check_mu(mu)?;
    let mut rng = stream.rng();
    Ok(SpectrumSample { singular_values: draw_singular_values(n, mu, &mut rng), stream: *stream })
}

/// Bin layout of a 1-D (or square 2-D) histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramSpec {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self { bins: 50, lo: 0.0, hi: 5.0 }
    }
}

impl HistogramSpec {
    pub fn new(bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "histogram needs bins >= 1 and a finite range lo < hi (got {bins}, [{lo}, {hi}])"
            )));
        }
        Ok(Self { bins, lo, hi })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| self.lo + self.width() * i as f64).collect()
    }

    fn index(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return if x == self.hi { Some(self.bins - 1) } else { None };
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.bins - 1))
    }
}

/// Normalized histogram density with per-bin standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramEstimate {
    pub bin_edges: Vec<f64>,
    pub density: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Number of draws (matrices), not pooled values.
    pub sample_count: u64,
    /// Fraction of pooled values that fell outside the range.
    pub outside_fraction: f64,
}

impl HistogramEstimate {
    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Integer per-bin sums of the per-draw counts c_b and of c_b².
#[derive(Debug, Clone, Default)]
struct Counts {
    sum: Vec<u64>,
    sum_sq: Vec<u64>,
    draws: u64,
    values: u64,
    inside: u64,
    scratch: Vec<u64>,
}

impl Counts {
    fn new(cells: usize) -> Self {
        Self { sum: vec![0; cells], sum_sq: vec![0; cells], scratch: vec![0; cells], ..Default::default() }
    }

    fn add_draw(&mut self, cells: impl Iterator<Item = Option<usize>>) {
        self.draws += 1;
        let mut touched = Vec::new();
        for c in cells {
            self.values += 1;
            if let Some(i) = c {
                self.inside += 1;
                if self.scratch[i] == 0 {
                    touched.push(i);
                }
                self.scratch[i] += 1;
            }
        }
        for i in touched {
            let c = self.scratch[i];
            self.sum[i] += c;
            self.sum_sq[i] += c * c;
            self.scratch[i] = 0;
        }
    }

    fn merge(&mut self, o: &Self) {
        for i in 0..self.sum.len() {
            self.sum[i] += o.sum[i];
            self.sum_sq[i] += o.sum_sq[i];
        }
        self.draws += o.draws;
        self.values += o.values;
        self.inside += o.inside;
    }

    /// Density C_b·total/(inside·cell) and its standard error from the
    /// per-draw variance of c_b; draws are independent, the values within a
    /// draw are not.
    fn finish(&self, cell: f64, total: f64) -> (Vec<f64>, Vec<f64>) {
        let s = self.draws as f64;
        let norm = if self.inside > 0 { total / (self.inside as f64 * cell) } else { 0.0 };
        let mut dens = Vec::with_capacity(self.sum.len());
        let mut se = Vec::with_capacity(self.sum.len());
        for i in 0..self.sum.len() {
            let m = self.sum[i] as f64 / s;
            let var = if self.draws > 1 {
                ((self.sum_sq[i] as f64 / s - m * m) * s / (s - 1.0)).max(0.0)
            } else {
                0.0
            };
            dens.push(self.sum[i] as f64 * norm);
            se.push((var / s).sqrt() * s * norm);
        }
        (dens, se)
    }
}

fn histogram_from_counts(c: &Counts, spec: &HistogramSpec) -> HistogramEstimate {
    let (density, std_error) = c.finish(spec.width(), 1.0);
    HistogramEstimate {
        bin_edges: spec.edges(),
        density,
        std_error,
        sample_count: c.draws,
        outside_fraction: if c.values > 0 { 1.0 - c.inside as f64 / c.values as f64 } else { 0.0 },
    }
}

fn require_samples(got: usize, min: usize, what: &str) -> Result<()> {
    if got < min {
        return Err(Error::InvalidArgument(format!("{what} needs at least {min} samples (got {got})")));
    }
    Ok(())
}

/// Pools all values of every draw into a histogram normalized to unit area
/// over the range.
pub fn histogram_density<I>(draws: I, spec: &HistogramSpec) -> Result<HistogramEstimate>
where
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    let mut c = Counts::new(spec.bins);
    for d in draws {
        c.add_draw(d.as_ref().iter().map(|&x| spec.index(x)));
    }
    require_samples(c.draws as usize, 1000, "histogram_density")?;
    Ok(histogram_from_counts(&c, spec))
}

/// Samples `samples` matrices and histograms their pooled singular values.
pub fn mc_density(n: usize, mu: f64, samples: usize, stream: &RngStream, spec: &HistogramSpec) -> Result<HistogramEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("sampling needs N >= 1".into()));
    }
    check_mu(mu)?;
    require_samples(samples, 1000, "mc_density")?;
    let parts = run_blocks(samples, stream, |rng, count| {
        let mut c = Counts::new(spec.bins);
        for _ in 0..count {
            let sv = draw_singular_values(n, mu, rng);
            c.add_draw(sv.iter().map(|&x| spec.index(x)));
        }
        c
    });
    let mut total = Counts::new(spec.bins);
    for p in &parts {
        total.merge(p);
    }
    Ok(histogram_from_counts(&total, spec))
}

/// 2-D histogram of ordered pairs (λᵢ, λⱼ), i ≠ j, normalized so that its
/// integral over the square is N(N−1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairHistogram {
    pub bin_edges: Vec<f64>,
    /// Row-major: `density[a * bins + b]` for λ₁ in bin a, λ₂ in bin b.
    pub density: Vec<f64>,
    pub std_error: Vec<f64>,
    pub sample_count: u64,
    pub n: usize,
}

impl PairHistogram {
    pub fn bins(&self) -> usize {
        self.bin_edges.len() - 1
    }

    pub fn at(&self, a: usize, b: usize) -> (f64, f64) {
        let k = a * self.bins() + b;
        (self.density[k], self.std_error[k])
    }
}

fn pair_cells<'a>(v: &'a [f64], spec: &'a HistogramSpec) -> impl Iterator<Item = Option<usize>> + 'a {
    let idx: Vec<Option<usize>> = v.iter().map(|&x| spec.index(x)).collect();
    let n = v.len();
    (0..n).flat_map(move |i| {
        let idx = idx.clone();
        (0..n).filter(move |&j| j != i).map(move |j| match (idx[i], idx[j]) {
            (Some(a), Some(b)) => Some(a * spec.bins + b),
            _ => None,
        })
    })
}

fn pair_from_counts(c: &Counts, spec: &HistogramSpec, n: usize) -> PairHistogram {
    let w = spec.width();
    let (density, std_error) = c.finish(w * w, (n * (n - 1)) as f64);
    PairHistogram { bin_edges: spec.edges(), density, std_error, sample_count: c.draws, n }
}

/// Pair-correlation histogram from given draws (all of equal size N ≥ 2).
pub fn pair_correlation_estimate<I>(draws: I, spec: &HistogramSpec) -> Result<PairHistogram>
where
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    let mut c = Counts::new(spec.bins * spec.bins);
    let mut n = None;
    for d in draws {
        let v = d.as_ref();
        if *n.get_or_insert(v.len()) != v.len() {
            return Err(Error::InvalidArgument("all draws must have the same size".into()));
        }
        c.add_draw(pair_cells(v, spec));
    }
    let n = n.unwrap_or(0);
    if n < 2 {
        return Err(Error::InvalidArgument("pair correlations need N >= 2".into()));
    }
    require_samples(c.draws as usize, 10_000, "pair_correlation_estimate")?;
    Ok(pair_from_counts(&c, spec, n))
}

/// Samples matrices and histograms the ordered pairs of singular values.
pub fn mc_pair_correlation(n: usize, mu: f64, samples: usize, stream: &RngStream, spec: &HistogramSpec) -> Result<PairHistogram> {
    if n < 2 {
        return Err(Error::InvalidArgument("pair correlations need N >= 2".into()));
    }
    check_mu(mu)?;
    require_samples(samples, 10_000, "mc_pair_correlation")?;
    let parts = run_blocks(samples, stream, |rng, count| {
        let mut c = Counts::new(spec.bins * spec.bins);
        for _ in 0..count {
            let sv = draw_singular_values(n, mu, rng);
            c.add_draw(pair_cells(&sv, spec));
        }
        c
    });
    let mut total = Counts::new(spec.bins * spec.bins);
    for p in &parts {
        total.merge(p);
    }
    Ok(pair_from_counts(&total, spec, n))
}

/// ⟨∏_f det(y_f − WW†)⟩ over N × N draws for the given values y_f = κ_f².
pub fn characteristic_product_mc(n: usize, mu: f64, y: &[f64], samples: usize, stream: &RngStream) -> Result<Estimate> {
    check_mu(mu)?;
    require_samples(samples, 1000, "characteristic_product_mc")?;
    Ok(mc_mean(samples, stream, |rng| {
        let sv = draw_singular_values(n, mu, rng);
        y.iter().map(|&yf| sv.iter().map(|&l| yf - l * l).product::<f64>()).product()
    }))
}

/// Heine average ⟨det(x² − WW†)⟩ over j × j draws; its exact value is q_j(x²).
pub fn heine_oracle(j: usize, mu: f64, x: f64, samples: usize, stream: &RngStream) -> Result<Estimate> {
    if j == 0 {
        return Err(Error::InvalidArgument("the Heine oracle needs j >= 1".into()));
    }
    require_samples(samples, 10_000, "heine_oracle")?;
    characteristic_product_mc(j, mu, &[x * x], samples, stream)
}

/// ⟨Σ λᵢ²⟩ = ⟨Tr WW†⟩; the exact value is (1 + μ²)N².
pub fn mean_square_sum(n: usize, mu: f64, samples: usize, stream: &RngStream) -> Result<Estimate> {
    check_mu(mu)?;
    require_samples(samples, 1000, "mean_square_sum")?;
    Ok(mc_mean(samples, stream, |rng| draw_singular_values(n, mu, rng).iter().map(|l| l * l).sum()))
}

/// One bin of an analytic-versus-histogram comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinComparison {
    pub bin_center: f64,
    pub analytic: f64,
    pub histogram: f64,
    pub std_error: f64,
    /// (histogram − analytic)/std_error; 0 for bins without data.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub bins: Vec<BinComparison>,
    pub chi2: f64,
    /// Number of bins with a nonzero standard error.
    pub dof: usize,
    pub chi2_per_dof: f64,
    pub fraction_within_3se: f64,
    pub max_abs_z: f64,
}

impl ComparisonReport {
    /// ≥ 95% of bins within 3 SE, all within 5 SE, χ²/dof ≤ 1.5.
    pub fn passes(&self) -> bool {
        self.fraction_within_3se >= 0.95 && self.max_abs_z <= 5.0 && self.chi2_per_dof <= 1.5
    }
}

/// Bin averages of ρ_N, rescaled to the mass of ρ_N inside the range so they
/// match a histogram normalized over that range.
pub fn bin_averaged_density(ks: &KernelSet, spec: &HistogramSpec) -> Result<Vec<f64>> {
    let q = QuadratureSpec { abs_tol: 1e-12, rel_tol: 1e-9, max_subdivisions: 100 };
    let edges = spec.edges();
    let masses: Vec<Result<f64>> = edges
        .par_windows(2)
        .map(|w| {
            let mut err = None;
            let r = integrate_finite(
                |l| {
                    level_density(ks, l).unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        0.0
                    })
                },
                w[0],
                w[1],
                &q,
            );
            match err {
                Some(e) => Err(e),
                None => r.require("bin average of the level density"),
            }
        })
        .collect();
    let masses: Vec<f64> = masses.into_iter().collect::<Result<_>>()?;
    let inside: f64 = masses.iter().sum();
    Ok(masses.iter().map(|m| m / (inside * spec.width())).collect())
}

/// Compares a histogram with bin averages of the analytic density.
pub fn compare_density(analytic: &[f64], hist: &HistogramEstimate) -> ComparisonReport {
    let centers = hist.bin_centers();
    let mut bins = Vec::with_capacity(analytic.len());
    let (mut chi2, mut dof, mut within, mut max_z) = (0.0, 0, 0, 0.0f64);
    for i in 0..analytic.len() {
        let se = hist.std_error[i];
        let z = if se > 0.0 { (hist.density[i] - analytic[i]) / se } else { 0.0 };
        if se > 0.0 {
            chi2 += z * z;
            dof += 1;
            if z.abs() <= 3.0 {
                within += 1;
            }
            max_z = max_z.max(z.abs());
        }
        bins.push(BinComparison { bin_center: centers[i], analytic: analytic[i], histogram: hist.density[i], std_error: se, z });
    }
    let d = dof.max(1) as f64;
    ComparisonReport { bins, chi2, dof, chi2_per_dof: chi2 / d, fraction_within_3se: within as f64 / d, max_abs_z: max_z }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;

    #[test]
    fn mu_zero_gives_absolute_eigenvalues() {
        let s = RngStream::new(3, 0);
        let mut rng = s.rng();
        let w = sample_w(4, 0.0, &mut rng);
        let mut rng = s.rng();
        let sv = draw_singular_values(4, 0.0, &mut rng);
        let mut ev: Vec<f64> = hermitian_eigenvalues(&w).unwrap().iter().map(|v| v.abs()).collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in sv.iter().zip(&ev) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn running_stats_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 17) as f64 * 0.3).collect();
        let mut one = RunningStats::default();
        xs.iter().for_each(|&x| one.push(x));
        let mut a = RunningStats::default();
        let mut b = RunningStats::default();
        xs[..40].iter().for_each(|&x| a.push(x));
        xs[40..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let (e1, e2) = (one.estimate(), a.estimate());
        assert!((e1.mean - e2.mean).abs() < 1e-12 && (e1.std_error - e2.std_error).abs() < 1e-12);
    }

    #[test]
    fn uniform_input_gives_flat_histogram() {
        let draws: Vec<Vec<f64>> = (0..5000).map(|i| vec![5.0 * ((i as f64 + 0.5) / 5000.0)]).collect();
        let h = histogram_density(&draws, &HistogramSpec::default()).unwrap();
        let area: f64 = h.density.iter().sum::<f64>() * 0.1;
        assert!((area - 1.0).abs() < 1e-12);
        for (d, s) in h.density.iter().zip(&h.std_error) {
            assert!((d - 0.2).abs() <= 3.0 * s);
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let draws = vec![vec![1.0]; 10];
        assert!(histogram_density(&draws, &HistogramSpec::default()).is_err());
        assert!(heine_oracle(1, 0.5, 1.0, 100, &RngStream::new(0, 0)).is_err());
    }
}

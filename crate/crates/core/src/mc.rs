//! Monte Carlo reference for `p(I | n)`.
//!
//! `pi` is drawn from the Dirichlet posterior by normalizing independent Gamma
//! draws, and `I(pi)` is recorded. The sample space is cut into a fixed
//! number of chunks, each with its own ChaCha stream derived from the master
//! seed, so the output does not depend on how many workers run the chunks.
//! The chunks double as the batches for batch-means standard errors.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MiError, Result};
use crate::table::CountTable;

/// Number of chunks (and batches) the sample space is split into.
pub const BATCHES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
    /// Histogram bins over `[0, I_max]`.
    pub bins: usize,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            workers: 0,
            bins: 100,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins = bins;
        self
    }
}

/// Equal-width histogram on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn build(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let bins = bins.max(1);
        let mut counts = vec![0u64; bins];
        let width = (hi - lo) / bins as f64;
        for &x in samples {
            let k = if width > 0.0 { ((x - lo) / width) as usize } else { 0 };
            counts[k.min(bins - 1)] += 1;
        }
        Self { lo, hi, counts }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.counts.len()).map(|k| self.lo + w * (k as f64 + 0.5)).collect()
    }

    /// Probability mass per bin; sums to 1.
    pub fn mass(&self) -> Vec<f64> {
        let total: u64 = self.counts.iter().sum();
        self.counts.iter().map(|&c| c as f64 / total as f64).collect()
    }

    /// Density estimate per bin.
    pub fn density(&self) -> Vec<f64> {
        let w = self.width();
        self.mass().into_iter().map(|m| m / w).collect()
    }

    /// `x,density` CSV with bin centers.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,density")?;
        for (x, d) in self.centers().into_iter().zip(self.density()) {
            writeln!(out, "{x},{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResult {
    pub sample_count: usize,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub central3: f64,
    pub central4: f64,
    /// Batch-means standard errors.
    pub mean_se: f64,
    pub variance_se: f64,
    pub skewness_se: f64,
    pub kurtosis_se: f64,
    pub central3_se: f64,
    pub central4_se: f64,
    pub histogram: Histogram,
    /// Fewer than two samples: spread statistics are not meaningful.
    pub degenerate: bool,
    #[serde(skip)]
    sorted: Vec<f64>,
}

impl McResult {
    /// The samples in ascending order (the support of the empirical cdf).
    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `<= x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Kolmogorov sup-distance between the empirical cdf and `cdf`.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }

    /// `x,cumulative` CSV at `points` evenly spaced order statistics.
    pub fn write_ecdf_csv<W: Write>(&self, mut out: W, points: usize) -> Result<()> {
        writeln!(out, "x,cumulative")?;
        let n = self.sorted.len();
        let points = points.clamp(1, n.max(1));
        for k in 1..=points {
            let idx = (k * n).div_ceil(points).saturating_sub(1);
            if let Some(&x) = self.sorted.get(idx) {
                writeln!(out, "{},{}", x, (idx + 1) as f64 / n as f64)?;
            }
        }
        Ok(())
    }
}

/// Draws one point from `Dirichlet(alphas)`.
pub fn sample_dirichlet<R: Rng + ?Sized>(alphas: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let gammas = gamma_samplers(alphas)?;
    let mut out: Vec<f64> = gammas.iter().map(|g| g.sample(rng)).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= total);
    Ok(out)
}

fn gamma_samplers(alphas: &[f64]) -> Result<Vec<Gamma<f64>>> {
    if alphas.is_empty() {
        return Err(MiError::InvalidArgument("empty Dirichlet parameter vector".into()));
    }
    alphas
        .iter()
        .map(|&a| {
            if !(a > 0.0) || !a.is_finite() {
                return Err(MiError::UndefinedDistribution(format!(
                    "Dirichlet parameters must be positive, got {a}"
                )));
            }
            Gamma::new(a, 1.0).map_err(|e| MiError::InvalidArgument(e.to_string()))
        })
        .collect()
}

/// `I` of the normalized table `g` (unnormalized weights are fine).
fn mi_of_weights(g: &[f64], rows: usize, cols: usize, row: &mut [f64], col: &mut [f64]) -> f64 {
    row.iter_mut().for_each(|x| *x = 0.0);
    col.iter_mut().for_each(|x| *x = 0.0);
    let mut total = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let v = g[i * cols + j];
            row[i] += v;
            col[j] += v;
            total += v;
        }
    }
    let mut mi = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let v = g[i * cols + j];
            if v > 0.0 {
                mi += v * (v * total / (row[i] * col[j])).ln();
            }
        }
    }
    (mi / total).max(0.0)
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunk_sizes(samples: usize) -> Vec<usize> {
    let chunks = samples.min(BATCHES);
    (0..chunks)
        .map(|c| samples / chunks + usize::from(c < samples % chunks))
        .collect()
}

fn run_chunks<F>(workers: usize, sizes: &[usize], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize, usize) -> Vec<f64> + Sync,
{
    let job = || sizes.par_iter().enumerate().map(|(c, &m)| f(c, m)).collect();
    if workers == 0 {
        Ok(job())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| MiError::InvalidArgument(e.to_string()))?;
        Ok(pool.install(job))
    }
}

/// Samples `I(pi)` with `pi ~ Dirichlet(counts)`.
pub fn mi_posterior_mc(table: &CountTable, config: &McConfig) -> Result<McResult> {
    if !table.is_complete() {
        return Err(MiError::Unsupported(
            "Monte Carlo sampling of the posterior needs complete data; see incomplete_posterior_mc".into(),
        ));
    }
    if config.samples == 0 {
        return Err(MiError::InvalidArgument("at least one sample is required".into()));
    }
    let gammas = gamma_samplers(table.counts())?;
    let (rows, cols) = (table.rows(), table.cols());
    let sizes = chunk_sizes(config.samples);
    let chunks = run_chunks(config.workers, &sizes, |c, m| {
        let mut rng = chunk_rng(config.seed, c);
        let mut g = vec![0.0; rows * cols];
        let (mut row, mut col) = (vec![0.0; rows], vec![0.0; cols]);
        (0..m)
            .map(|_| {
                for (slot, d) in g.iter_mut().zip(&gammas) {
                    *slot = d.sample(&mut rng);
                }
                mi_of_weights(&g, rows, cols, &mut row, &mut col)
            })
            .collect()
    })?;
    Ok(summarize_chunks(chunks, table.i_max(), config))
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    mean: f64,
    variance: f64,
    central3: f64,
    central4: f64,
}

impl Moments {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = compensated_sum(xs.iter().copied()) / n;
        let c = |p: i32| compensated_sum(xs.iter().map(|&x| (x - mean).powi(p))) / n;
        // unbiased variance; higher central moments as plain averages
        let m2 = c(2);
        let variance = if xs.len() > 1 { m2 * n / (n - 1.0) } else { 0.0 };
        Self {
            mean,
            variance,
            central3: c(3),
            central4: c(4),
        }
    }

    fn skewness(&self) -> f64 {
        self.central3 / self.variance.powf(1.5)
    }

    fn kurtosis(&self) -> f64 {
        self.central4 / (self.variance * self.variance)
    }
}

fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in xs {
        let y = x - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

fn standard_error(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::NAN;
    }
    let m = Moments::of(values);
    (m.variance / values.len() as f64).sqrt()
}

fn summarize_chunks(chunks: Vec<Vec<f64>>, i_max: f64, config: &McConfig) -> McResult {
    let batch: Vec<Moments> = chunks.iter().map(|c| Moments::of(c)).collect();
    let se = |f: &dyn Fn(&Moments) -> f64| {
        let v: Vec<f64> = batch.iter().map(f).collect();
        standard_error(&v)
    };
    let mean_se = se(&|m| m.mean);
    let variance_se = se(&|m| m.variance);
    let skewness_se = se(&|m| m.skewness());
    let kurtosis_se = se(&|m| m.kurtosis());
    let central3_se = se(&|m| m.central3);
    let central4_se = se(&|m| m.central4);

    let all: Vec<f64> = chunks.into_iter().flatten().collect();
    let m = Moments::of(&all);
    let degenerate = all.len() < 2;
    let histogram = Histogram::build(&all, 0.0, i_max, config.bins);
    let mut sorted = all;
    sorted.sort_by(f64::total_cmp);
    McResult {
        sample_count: sorted.len(),
        seed: config.seed,
        mean: m.mean,
        variance: m.variance,
        skewness: if degenerate { f64::NAN } else { m.skewness() },
        kurtosis: if degenerate { f64::NAN } else { m.kurtosis() },
        central3: m.central3,
        central4: m.central4,
        mean_se,
        variance_se,
        skewness_se,
        kurtosis_se,
        central3_se,
        central4_se,
        histogram,
        degenerate,
        sorted,
    }
}

/// Posterior samples of `I` under missing data.
///
/// Targets the density proportional to
/// `prod pi_ij^(n_ij - 1) * prod pi_i+^(n_i?) * prod pi_+j^(n_?j)` with a
/// data-augmentation Gibbs chain: impute the margin-only units into cells
/// given `pi`, then redraw `pi` from the completed Dirichlet. Meant for small
/// reference tables; margin counts must be whole numbers. Runs a single
/// chain, so `config.workers` is ignored; batch means over consecutive
/// stretches of the chain give honest standard errors.
pub fn incomplete_posterior_mc(table: &CountTable, config: &McConfig, burn_in: usize) -> Result<McResult> {
    if config.samples == 0 {
        return Err(MiError::InvalidArgument("at least one sample is required".into()));
    }
    let whole = |v: &[f64]| -> Result<Vec<u64>> {
        v.iter()
            .map(|&x| {
                if x.fract() == 0.0 {
                    Ok(x as u64)
                } else {
                    Err(MiError::Unsupported(format!(
                        "margin-only counts must be whole numbers for imputation, got {x}"
                    )))
                }
            })
            .collect()
    };
    let row_missing = whole(table.row_missing())?;
    let col_missing = whole(table.col_missing())?;
    let (rows, cols) = (table.rows(), table.cols());
    let base = table.counts();
    gamma_samplers(base)?;

    let mut rng = chunk_rng(config.seed, 0);
    let mut pi = base.to_vec();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    let mut alpha = vec![0.0; rows * cols];
    let (mut row, mut col) = (vec![0.0; rows], vec![0.0; cols]);
    let mut draws = Vec::with_capacity(config.samples);
    let mut weights = vec![0.0; rows.max(cols)];
    for step in 0..burn_in + config.samples {
        alpha.copy_from_slice(base);
        for i in 0..rows {
            if row_missing[i] > 0 {
                for j in 0..cols {
                    weights[j] = pi[i * cols + j];
                }
                let alloc = multinomial(&mut rng, row_missing[i], &weights[..cols])?;
                for j in 0..cols {
                    alpha[i * cols + j] += alloc[j] as f64;
                }
            }
        }
        for j in 0..cols {
            if col_missing[j] > 0 {
                for i in 0..rows {
                    weights[i] = pi[i * cols + j];
                }
                let alloc = multinomial(&mut rng, col_missing[j], &weights[..rows])?;
                for i in 0..rows {
                    alpha[i * cols + j] += alloc[i] as f64;
                }
            }
        }
        pi = sample_dirichlet(&alpha, &mut rng)?;
        if step >= burn_in {
            draws.push(mi_of_weights(&pi, rows, cols, &mut row, &mut col));
        }
    }
    let mut chunks = Vec::new();
    let mut rest = draws.as_slice();
    for m in chunk_sizes(config.samples) {
        let (head, tail) = rest.split_at(m);
        chunks.push(head.to_vec());
        rest = tail;
    }
    Ok(summarize_chunks(chunks, table.i_max(), config))
}

/// Multinomial draw by successive conditional binomials.
fn multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, weights: &[f64]) -> Result<Vec<u64>> {
    let mut left = n;
    let mut mass: f64 = weights.iter().sum();
    let mut out = vec![0u64; weights.len()];
    for (k, &w) in weights.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == weights.len() {
            out[k] = left;
            break;
        }
        let p = if mass > 0.0 { (w / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(left, p)
            .map_err(|e| MiError::InvalidArgument(e.to_string()))?
            .sample(rng);
        out[k] = draw;
        left -= draw;
        mass -= w;
    }
    Ok(out)
}

/// Outcome of [`tail_exponent_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailProbe {
    /// Fitted slope of `ln density` against `ln I`.
    pub exponent: f64,
    /// `(r-1)(s-1)/2 - 1`.
    pub expected: f64,
    /// Log-spaced bins that entered the regression.
    pub bins_used: usize,
    /// Too little mass near zero for a meaningful slope.
    pub inconclusive: bool,
}

const PROBE_BINS: usize = 20;
const PROBE_MIN_COUNT: u64 = 20;
/// The probe spans `[q / PROBE_SPAN, q]` with `q` the lowest decile.
const PROBE_SPAN: f64 = 100.0;

/// Estimates the small-`I` power-law exponent of `p(I | n)` from samples.
///
/// The density is histogrammed on log-spaced bins covering two decades below
/// the 10% quantile and `ln density` is regressed on `ln I`. When the lower
/// decade holds less than a thousandth of the decile, the posterior is not
/// concentrated near zero and the result is flagged inconclusive.
pub fn tail_exponent_probe(table: &CountTable, samples: usize, seed: u64) -> Result<TailProbe> {
    let dbar = ((table.rows() - 1) * (table.cols() - 1)) as f64;
    let expected = dbar / 2.0 - 1.0;
    let result = mi_posterior_mc(table, &McConfig::new(samples, seed))?;
    let xs = result.sorted_samples();
    let q = xs[xs.len() / 10];
    let lo = q / PROBE_SPAN;
    let inconclusive_probe = TailProbe {
        exponent: f64::NAN,
        expected,
        bins_used: 0,
        inconclusive: true,
    };
    if !(q > 0.0) {
        return Ok(inconclusive_probe);
    }
    let step = PROBE_SPAN.ln() / PROBE_BINS as f64;
    let edges: Vec<f64> = (0..=PROBE_BINS).map(|k| lo * (step * k as f64).exp()).collect();
    let mut counts = vec![0u64; PROBE_BINS];
    let start = xs.partition_point(|&x| x < lo);
    for &x in &xs[start..] {
        if x >= q {
            break;
        }
        let k = (((x / lo).ln() / step) as usize).min(PROBE_BINS - 1);
        counts[k] += 1;
    }
    let decile = xs.len() / 10;
    let lower_decade: u64 = counts[..PROBE_BINS / 2].iter().sum();
    if (lower_decade as f64) < 1e-3 * decile as f64 {
        return Ok(inconclusive_probe);
    }
    let points: Vec<(f64, f64)> = (0..PROBE_BINS)
        .filter(|&k| counts[k] >= PROBE_MIN_COUNT)
        .map(|k| {
            let width = edges[k + 1] - edges[k];
            let center = (edges[k] * edges[k + 1]).sqrt();
            (center.ln(), (counts[k] as f64 / width).ln())
        })
        .collect();
    if points.len() < 5 {
        return Ok(inconclusive_probe);
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(TailProbe {
        exponent: sxy / sxx,
        expected,
        bins_used: points.len(),
        inconclusive: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{mean_exact, mutual_information};

    #[test]
    fn weights_mi_matches_normalized_mi() {
        let g = [4.0, 1.0, 2.0, 8.0, 0.5, 3.0];
        let (mut r, mut c) = (vec![0.0; 2], vec![0.0; 3]);
        let a = mi_of_weights(&g, 2, 3, &mut r, &mut c);
        let b = mutual_information(&g, 2, 3);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn chunking_covers_all_samples() {
        for n in [1, 7, 99, 100, 101, 12_345] {
            let sizes = chunk_sizes(n);
            assert_eq!(sizes.iter().sum::<usize>(), n);
            assert!(sizes.len() <= BATCHES);
        }
    }

    #[test]
    fn boundaries() {
        let t = CountTable::parse_inline("3,2;1,4").unwrap();
        assert!(mi_posterior_mc(&t, &McConfig::new(0, 1)).is_err());
        let one = mi_posterior_mc(&t, &McConfig::new(1, 1)).unwrap();
        assert!(one.degenerate);
        assert_eq!(one.sample_count, 1);
        let bad = CountTable::parse_inline("0,2;1,4").unwrap();
        assert!(mi_posterior_mc(&bad, &McConfig::new(10, 1)).is_err());
        let inc = CountTable::with_missing(2, 2, vec![3.0, 2.0, 1.0, 4.0], vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(mi_posterior_mc(&inc, &McConfig::new(10, 1)), Err(MiError::Unsupported(_))));
    }

    #[test]
    fn dirichlet_rejects_bad_alpha() {
        let mut rng = chunk_rng(1, 0);
        assert!(sample_dirichlet(&[1.0, 0.0], &mut rng).is_err());
        assert!(sample_dirichlet(&[1.0, -1.0], &mut rng).is_err());
        let p = sample_dirichlet(&[1.0, 2.0, 3.0], &mut rng).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn histogram_mass_and_support() {
        let t = CountTable::parse_inline("2,1;1,2").unwrap();
        let r = mi_posterior_mc(&t, &McConfig::new(20_000, 3)).unwrap();
        let mass: f64 = r.histogram.mass().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
        let top = *r.sorted_samples().last().unwrap();
        assert!(top <= t.i_max() + 1e-12);
        assert!(r.mean >= 0.0 && r.mean <= t.i_max());
    }

    #[test]
    fn symmetric_table_mean_within_three_se() {
        let t = CountTable::parse_inline("25,25;25,25").unwrap();
        let r = mi_posterior_mc(&t, &McConfig::new(200_000, 11)).unwrap();
        let exact = mean_exact(&t).unwrap();
        assert!((r.mean - exact).abs() < 3.0 * r.mean_se, "{} vs {exact} (se {})", r.mean, r.mean_se);
    }

    #[test]
    fn ecdf_and_ks() {
        let t = CountTable::parse_inline("5,3;2,6").unwrap();
        let r = mi_posterior_mc(&t, &McConfig::new(1000, 5)).unwrap();
        assert_eq!(r.ecdf(-1.0), 0.0);
        assert_eq!(r.ecdf(1.0), 1.0);
        assert!(r.ks_distance(|x| r.ecdf(x)) <= 1.0 / 1000.0 + 1e-15);
        let mut buf = Vec::new();
        r.write_ecdf_csv(&mut buf, 10).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 11);
        assert!(text.lines().last().unwrap().ends_with(",1"));
    }

    #[test]
    fn multinomial_conserves_count() {
        let mut rng = chunk_rng(9, 0);
        for n in [0, 1, 5, 100] {
            let v = multinomial(&mut rng, n, &[0.2, 0.0, 0.5, 0.3]).unwrap();
            assert_eq!(v.iter().sum::<u64>(), n);
            assert_eq!(v[1], 0);
        }
    }

    #[test]
    fn dependent_table_probe_is_inconclusive() {
        let t = CountTable::parse_inline("40,10;20,80").unwrap();
        let p = tail_exponent_probe(&t, 200_000, 1).unwrap();
        assert!(p.inconclusive);
    }
}

//! Monte Carlo realization of repeated single-particle runs.
//!
//! Each run draws an environment field b̃ ~ N(0, s_d²), shifts the pointer
//! packet to cosγ + b̃ cosη sinγ and records one momentum sample from it.
//! Runs are split into fixed-size chunks; chunk `k` uses ChaCha8 stream `k`
//! of the master seed, and chunk results are merged in index order, so a
//! report depends only on the configuration and never on thread count.

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::continuum::{pointer_moments, PointerMoments};
use crate::error::{Error, Result};
use crate::field::MeasurementGeometry;
use crate::stats::Moments;

/// Runs per RNG stream.
pub const CHUNK_RUNS: u64 = 8192;

/// Default histogram half-width in units of max(σ_p̃, s_d).
pub const AUTO_RANGE_WIDTHS: f64 = 6.0;
const MIN_RANGE_WIDTHS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub runs: u64,
    pub seed: u64,
    pub s_d: f64,
    pub geometry: MeasurementGeometry,
    pub sigma_p: f64,
    pub bins: usize,
    pub range: (f64, f64),
}

impl EnsembleConfig {
    /// Configuration with the histogram range centred on cosγ and spanning
    /// ±[`AUTO_RANGE_WIDTHS`]·max(σ_p̃, s_d).
    pub fn with_auto_range(
        runs: u64,
        seed: u64,
        s_d: f64,
        geometry: MeasurementGeometry,
        sigma_p: f64,
        bins: usize,
    ) -> Result<Self> {
        let half = AUTO_RANGE_WIDTHS * sigma_p.max(s_d);
        let mean = geometry.gamma().cos();
        let config = Self {
            runs,
            seed,
            s_d,
            geometry,
            sigma_p,
            bins,
            range: (mean - half, mean + half),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(Error::invalid("runs", "must be >= 1"));
        }
        if self.bins < 2 {
            return Err(Error::invalid(
                "bins",
                format!("{} must be >= 2", self.bins),
            ));
        }
        if !(self.sigma_p > 0.0) || !self.sigma_p.is_finite() {
            return Err(Error::invalid(
                "sigma_p",
                format!("{} must be > 0", self.sigma_p),
            ));
        }
        if !(self.s_d >= 0.0) || !self.s_d.is_finite() {
            return Err(Error::invalid("s_d", format!("{} must be >= 0", self.s_d)));
        }
        let (lo, hi) = self.range;
        let mean = self.geometry.gamma().cos();
        let half = MIN_RANGE_WIDTHS * self.sigma_p.max(self.s_d);
        if !(lo <= mean - half && hi >= mean + half) {
            return Err(Error::invalid(
                "range",
                format!("[{lo}, {hi}] must cover {mean} +/- {half}"),
            ));
        }
        Ok(())
    }
}

/// One environment field, N(0, s_d²).
pub fn sample_field<R: Rng + ?Sized>(rng: &mut R, s_d: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    if s_d == 0.0 {
        0.0
    } else {
        s_d * z
    }
}

/// One pointer readout given the environment field of the run.
pub fn run_single<R: Rng + ?Sized>(
    b_tilde: f64,
    geometry: &MeasurementGeometry,
    sigma_p: f64,
    rng: &mut R,
) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    geometry.gamma().cos() + b_tilde * geometry.x_projection() + sigma_p * z
}

/// Fixed-width bins plus explicit underflow and overflow counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Self {
            edges: crate::pointer::linspace(lo, hi, bins + 1),
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
        }
    }

    pub fn add(&mut self, x: f64) {
        let lo = self.edges[0];
        let hi = self.edges[self.edges.len() - 1];
        if x < lo {
            self.underflow += 1;
        } else if x >= hi {
            self.overflow += 1;
        } else {
            let bins = self.counts.len();
            let mut i = (((x - lo) / (hi - lo)) * bins as f64) as usize;
            // Rounding can land one bin off near an edge.
            i = i.min(bins - 1);
            if x < self.edges[i] {
                i -= 1;
            } else if i + 1 < bins && x >= self.edges[i + 1] {
                i += 1;
            }
            self.counts[i] += 1;
        }
    }

    fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// CSV with columns `bin_lo,bin_hi,count`; underflow and overflow appear
    /// as the first and last rows with infinite outer edges.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_lo", "bin_hi", "count"])?;
        let n = self.counts.len();
        w.write_record([
            "-inf".to_string(),
            fmt_edge(self.edges[0]),
            self.underflow.to_string(),
        ])?;
        for i in 0..n {
            w.write_record([
                fmt_edge(self.edges[i]),
                fmt_edge(self.edges[i + 1]),
                self.counts[i].to_string(),
            ])?;
        }
        w.write_record([
            fmt_edge(self.edges[n]),
            "inf".to_string(),
            self.overflow.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        for rec in csv::Reader::from_reader(input).records() {
            let rec = rec?;
            let field = |i: usize| -> Result<&str> {
                rec.get(i)
                    .ok_or_else(|| Error::invalid("histogram", "short row"))
            };
            let lo: f64 = field(0)?
                .parse()
                .map_err(|_| Error::invalid("histogram", "bad bin_lo"))?;
            let hi: f64 = field(1)?
                .parse()
                .map_err(|_| Error::invalid("histogram", "bad bin_hi"))?;
            let c: u64 = field(2)?
                .parse()
                .map_err(|_| Error::invalid("histogram", "bad count"))?;
            rows.push((lo, hi, c));
        }
        if rows.len() < 4 {
            return Err(Error::invalid(
                "histogram",
                "needs underflow, overflow and two bins",
            ));
        }
        let inner = &rows[1..rows.len() - 1];
        let mut edges: Vec<f64> = inner.iter().map(|r| r.0).collect();
        edges.push(inner[inner.len() - 1].1);
        Ok(Self {
            edges,
            counts: inner.iter().map(|r| r.2).collect(),
            underflow: rows[0].2,
            overflow: rows[rows.len() - 1].2,
        })
    }
}

fn fmt_edge(x: f64) -> String {
    crate::curves::format_number(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleReport {
    pub runs: u64,
    pub mean: f64,
    /// Unbiased sample variance; `None` when runs < 2.
    pub variance: Option<f64>,
    pub histogram: Histogram,
    pub analytic: PointerMoments,
    /// (mean − cosγ)/SE; `None` when runs < 2.
    pub z_mean: Option<f64>,
    /// (variance − analytic)/SE with SE = analytic·√(2/(runs−1)).
    pub z_variance: Option<f64>,
}

impl EnsembleReport {
    /// Both z-scores within ±`limit`; `None` when the statistics are degenerate.
    pub fn agrees_within(&self, limit: f64) -> Option<bool> {
        Some(self.z_mean?.abs() <= limit && self.z_variance?.abs() <= limit)
    }

    /// Human-readable `key = value` summary block.
    pub fn summary(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"));
        format!(
            "runs = {}\nsample_mean = {:.8}\nsample_variance = {}\nanalytic_mean = {:.8}\n\
             analytic_variance = {:.8}\nz_mean = {}\nz_variance = {}\nunderflow = {}\noverflow = {}\n",
            self.runs,
            self.mean,
            self.variance.map_or_else(|| "n/a".to_string(), |v| format!("{v:.8}")),
            self.analytic.mean,
            self.analytic.variance,
            opt(self.z_mean),
            opt(self.z_variance),
            self.histogram.underflow,
            self.histogram.overflow,
        )
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunk_count(runs: u64) -> u64 {
    runs.div_ceil(CHUNK_RUNS)
}

fn chunk_len(runs: u64, chunk: u64) -> u64 {
    CHUNK_RUNS.min(runs - chunk * CHUNK_RUNS)
}

fn simulate_chunk<F: FnMut(f64)>(config: &EnsembleConfig, chunk: u64, mut sink: F) {
    let mut rng = chunk_rng(config.seed, chunk);
    for _ in 0..chunk_len(config.runs, chunk) {
        let b = sample_field(&mut rng, config.s_d);
        sink(run_single(b, &config.geometry, config.sigma_p, &mut rng));
    }
}

pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleReport> {
    config.validate()?;
    let analytic = pointer_moments(config.s_d, &config.geometry, config.sigma_p)?;
    let (lo, hi) = config.range;
    let partials: Vec<(Moments, Histogram)> = (0..chunk_count(config.runs))
        .into_par_iter()
        .map(|chunk| {
            let mut m = Moments::default();
            let mut h = Histogram::new(lo, hi, config.bins);
            simulate_chunk(config, chunk, |x| {
                m.push(x);
                h.add(x);
            });
            (m, h)
        })
        .collect();
    let mut moments = Moments::default();
    let mut histogram = Histogram::new(lo, hi, config.bins);
    for (m, h) in &partials {
        moments.merge(m);
        histogram.merge(h);
    }
    let variance = moments.variance();
    let n = moments.count as f64;
    let z_mean = variance.map(|v| (moments.mean - analytic.mean) / (v / n).sqrt());
    let z_variance =
        variance.map(|v| (v - analytic.variance) / (analytic.variance * (2.0 / (n - 1.0)).sqrt()));
    Ok(EnsembleReport {
        runs: moments.count,
        mean: moments.mean,
        variance,
        histogram,
        analytic,
        z_mean,
        z_variance,
    })
}

/// Every readout of the ensemble, in run order. Same streams as
/// [`run_ensemble`], so the samples are exactly the ones it aggregates.
pub fn ensemble_samples(config: &EnsembleConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let chunks: Vec<Vec<f64>> = (0..chunk_count(config.runs))
        .into_par_iter()
        .map(|chunk| {
            let mut v = Vec::with_capacity(chunk_len(config.runs, chunk) as usize);
            simulate_chunk(config, chunk, |x| v.push(x));
            v
        })
        .collect();
    Ok(chunks.concat())
}

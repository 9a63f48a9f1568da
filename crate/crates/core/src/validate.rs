//! Cross-check of the exact spin-environment engine against the continuum
//! model.
//!
//! For each s_d, couplings for N spins are drawn with matched variance, the
//! exact disturbance probability is computed with the precession phase
//! averaged over one period of ω₀T, and the mean over draws is compared with
//! `p1_weak`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::continuum::p1_weak;
use crate::error::{Error, Result};
use crate::exact::{
    branches, disturbance_probability, matched_couplings, DiscreteEnvironment, DEFAULT_SPIN_CAP,
};
use crate::field::MeasurementGeometry;
use crate::phase::Phase;
use crate::stats::Moments;

/// Largest acceptable |exact − continuum|.
pub const AGREEMENT_TOL: f64 = 0.01;
pub const DEFAULT_DRAWS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct CrossEngineConfig {
    pub n_spins: usize,
    pub s_d: Vec<f64>,
    pub seed: u64,
    pub draws: usize,
    pub geometry: MeasurementGeometry,
    pub sigma_p: f64,
    pub phase: Phase,
}

impl CrossEngineConfig {
    /// ξ = 0.1, γ = π/2, η = 0, σ_p̃ = 0.03, ω₀T = 200π averaged over one period.
    pub fn new(n_spins: usize, s_d: Vec<f64>, seed: u64) -> Self {
        Self {
            n_spins,
            s_d,
            seed,
            draws: DEFAULT_DRAWS,
            geometry: MeasurementGeometry::new(std::f64::consts::FRAC_PI_2, 0.0, 0.1)
                .expect("default geometry is valid"),
            sigma_p: 0.03,
            phase: Phase::window_averaged(200.0 * std::f64::consts::PI),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub s_d: f64,
    /// Mean exact P₁ over coupling draws.
    pub exact_mean: f64,
    /// Standard deviation of the exact P₁ across draws (0 for one draw).
    pub exact_sd: f64,
    pub continuum: f64,
    pub abs_diff: f64,
}

impl ComparisonRow {
    pub fn passes(&self) -> bool {
        self.abs_diff <= AGREEMENT_TOL
    }
}

pub fn cross_engine(config: &CrossEngineConfig) -> Result<Vec<ComparisonRow>> {
    if config.n_spins > DEFAULT_SPIN_CAP {
        return Err(Error::CapExceeded {
            n: config.n_spins,
            cap: DEFAULT_SPIN_CAP,
        });
    }
    if config.draws == 0 {
        return Err(Error::invalid("draws", "must be >= 1"));
    }
    if config.s_d.is_empty() {
        return Err(Error::EmptyGrid);
    }
    config
        .s_d
        .iter()
        .enumerate()
        .map(|(k, &s_d)| {
            if !(s_d >= 0.0) || !s_d.is_finite() {
                return Err(Error::invalid("s_d", format!("{s_d} must be >= 0")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            let mut stats = Moments::default();
            for _ in 0..config.draws {
                let env =
                    DiscreteEnvironment::uniform(matched_couplings(config.n_spins, s_d, &mut rng))?;
                let bs = branches(
                    &env,
                    &config.geometry,
                    config.phase.omega0_t,
                    config.sigma_p,
                )?;
                stats.push(disturbance_probability(
                    &bs,
                    env.amplitudes(),
                    config.phase,
                )?);
            }
            let continuum = p1_weak(s_d, &config.geometry)?;
            Ok(ComparisonRow {
                s_d,
                exact_mean: stats.mean,
                exact_sd: stats.variance().unwrap_or(0.0).sqrt(),
                continuum,
                abs_diff: (stats.mean - continuum).abs(),
            })
        })
        .collect()
}

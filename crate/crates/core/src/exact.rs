//! Exact evolution of qubit ⊗ pointer ⊗ N-spin environment.
//!
//! The σ_x⊗σ_x coupling is diagonal in the σ_x product basis of the
//! environment, so the total state splits into 2^N branches. In branch n the
//! qubit sees an extra field b̃_n along x and evolves under its own net field;
//! the pointer packet splits into copies shifted by ±Δp̃_n. Nothing is
//! truncated: every branch is kept, and pointer densities stay exact Gaussian
//! mixtures.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{
    effective_field, pointer_shift, wavepacket_overlap, EffectiveField, MeasurementGeometry,
};
use crate::phase::{branch_frequency_ratio, Phase};
use crate::pointer::{GaussianComponent, PointerMixture};

/// Default cap on the number of environment spins (2^16 branches).
pub const DEFAULT_SPIN_CAP: usize = 16;

const NORM_TOL: f64 = 1e-10;

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::CapExceeded { n, cap })
    } else {
        Ok(())
    }
}

/// Environment fields b̃_n for every bit pattern n, with spin i at bit i.
///
/// b̃_n = −Σ_i (−1)^{k_i} g̃_i, where g̃_i = g_i/(2μB₀). An empty coupling
/// list yields the single value 0.
pub fn environment_eigenvalues(couplings: &[f64]) -> Result<Vec<f64>> {
    environment_eigenvalues_capped(couplings, DEFAULT_SPIN_CAP)
}

pub fn environment_eigenvalues_capped(couplings: &[f64], cap: usize) -> Result<Vec<f64>> {
    check_cap(couplings.len(), cap)?;
    let len = 1usize << couplings.len();
    Ok((0..len)
        .map(|n| {
            -couplings
                .iter()
                .enumerate()
                .map(|(i, g)| if n >> i & 1 == 0 { *g } else { -*g })
                .sum::<f64>()
        })
        .collect())
}

/// Amplitudes 2^{−N/2} of the product state with every environment spin
/// balanced in the σ_x basis.
pub fn uniform_superposition_amplitudes(n_spins: usize) -> Result<Vec<Complex64>> {
    check_cap(n_spins, DEFAULT_SPIN_CAP)?;
    let len = 1usize << n_spins;
    let a = (len as f64).sqrt().recip();
    Ok(vec![Complex64::new(a, 0.0); len])
}

/// Couplings g̃_i drawn i.i.d. uniform on [−a, a] with a = s_d·√(3/N), so
/// that the spread of Σ±g̃_i has variance s_d² on average.
pub fn matched_couplings<R: Rng + ?Sized>(n_spins: usize, s_d: f64, rng: &mut R) -> Vec<f64> {
    if n_spins == 0 {
        return Vec::new();
    }
    let a = s_d * (3.0 / n_spins as f64).sqrt();
    (0..n_spins)
        .map(|_| a * (2.0 * rng.random::<f64>() - 1.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEnvironment {
    couplings: Vec<f64>,
    amplitudes: Vec<Complex64>,
}

impl DiscreteEnvironment {
    pub fn new(couplings: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_cap(couplings, amplitudes, DEFAULT_SPIN_CAP)
    }

    pub fn with_cap(couplings: Vec<f64>, amplitudes: Vec<Complex64>, cap: usize) -> Result<Self> {
        check_cap(couplings.len(), cap)?;
        if couplings.iter().any(|g| !g.is_finite()) {
            return Err(Error::invalid("couplings", "non-finite coupling"));
        }
        let expected = 1usize << couplings.len();
        if amplitudes.len() != expected {
            return Err(Error::invalid(
                "amplitudes",
                format!("expected {expected} amplitudes, got {}", amplitudes.len()),
            ));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(
                "amplitudes",
                format!("squared norm {norm} != 1"),
            ));
        }
        Ok(Self {
            couplings,
            amplitudes,
        })
    }

    /// Uniform product state over the given couplings.
    pub fn uniform(couplings: Vec<f64>) -> Result<Self> {
        let amplitudes = uniform_superposition_amplitudes(couplings.len())?;
        Self::new(couplings, amplitudes)
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn spins(&self) -> usize {
        self.couplings.len()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        environment_eigenvalues_capped(&self.couplings, usize::MAX)
            .expect("cap checked at construction")
    }
}

/// One environment branch of the evolved state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub index: usize,
    /// Environment field b̃_n in units of B₀.
    pub b_tilde: f64,
    pub field: EffectiveField,
    /// Precession phase Ω_nT = (ω₀T/2)·√(1 + b̃_n²).
    pub omega_t: f64,
    /// Pointer shift Δp̃_n.
    pub delta_p: f64,
    /// Overlap Γ_n of the ±Δp̃_n packets.
    pub overlap: f64,
}

impl Branch {
    pub fn frequency_ratio(&self) -> f64 {
        branch_frequency_ratio(self.b_tilde)
    }
}

pub fn branches(
    env: &DiscreteEnvironment,
    geometry: &MeasurementGeometry,
    omega0_t: f64,
    sigma_p: f64,
) -> Result<Vec<Branch>> {
    if !(sigma_p > 0.0) {
        return Err(Error::invalid("sigma_p", format!("{sigma_p} must be > 0")));
    }
    env.eigenvalues()
        .into_par_iter()
        .enumerate()
        .map(|(index, b_tilde)| {
            let field = effective_field(geometry, b_tilde)?;
            let delta_p = pointer_shift(geometry, b_tilde);
            Ok(Branch {
                index,
                b_tilde,
                field,
                omega_t: 0.5 * omega0_t * branch_frequency_ratio(b_tilde),
                delta_p,
                overlap: wavepacket_overlap(delta_p, sigma_p),
            })
        })
        .collect()
}

/// Reduced 2×2 density matrix of the qubit in the {|0⟩, |1⟩} basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinDensity(pub [[Complex64; 2]; 2]);

impl SpinDensity {
    pub fn zero() -> Self {
        SpinDensity([[Complex64::new(0.0, 0.0); 2]; 2])
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Largest |ρ_ij − conj(ρ_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.0;
        [
            (m[0][0] - m[0][0].conj()).norm(),
            (m[1][1] - m[1][1].conj()).norm(),
            (m[0][1] - m[1][0].conj()).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = 0.5 * (self.0[0][1] + self.0[1][0].conj());
        let mean = 0.5 * (a + d);
        let gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - gap, mean + gap]
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        let m = &self.0;
        (m[0][0] * m[0][0] + m[0][1] * m[1][0] + m[1][0] * m[0][1] + m[1][1] * m[1][1]).re
    }

    fn add_outer(&mut self, scale: Complex64, ket: &[Complex64; 2], bra: &[Complex64; 2]) {
        for (row, k) in self.0.iter_mut().zip(ket) {
            for (cell, b) in row.iter_mut().zip(bra) {
                *cell += scale * k * b.conj();
            }
        }
    }
}

/// Net-field eigenkets |r⁺⟩, |r⁻⟩ in the computational basis.
fn eigenkets(field: &EffectiveField) -> ([Complex64; 2], [Complex64; 2]) {
    let (c, s) = field.half_angles();
    let e = Complex64::from_polar(1.0, field.phi);
    (
        [Complex64::new(c, 0.0), e * s],
        [Complex64::new(s, 0.0), -e * c],
    )
}

fn check_aligned(branches: &[Branch], amplitudes: &[Complex64]) -> Result<()> {
    if branches.len() != amplitudes.len() {
        return Err(Error::invalid(
            "amplitudes",
            format!(
                "{} amplitudes for {} branches",
                amplitudes.len(),
                branches.len()
            ),
        ));
    }
    Ok(())
}

/// Qubit state after tracing out pointer and environment.
pub fn spin_density(
    branches: &[Branch],
    amplitudes: &[Complex64],
    phase: Phase,
) -> Result<SpinDensity> {
    check_aligned(branches, amplitudes)?;
    let mut rho = SpinDensity::zero();
    for (branch, amp) in branches.iter().zip(amplitudes) {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let (c, s) = branch.field.half_angles();
        let (plus, minus) = eigenkets(&branch.field);
        let coherence = phase.mean_exp(branch.frequency_ratio()) * (p * branch.overlap * c * s);
        rho.add_outer(Complex64::new(p * c * c, 0.0), &plus, &plus);
        rho.add_outer(Complex64::new(p * s * s, 0.0), &minus, &minus);
        rho.add_outer(coherence, &plus, &minus);
        rho.add_outer(coherence.conj(), &minus, &plus);
    }
    Ok(rho)
}

/// P₁ = ½ Σ_n |c_n|² sin²θ_n [1 − Γ_n cos(2Ω_nT)].
pub fn disturbance_probability(
    branches: &[Branch],
    amplitudes: &[Complex64],
    phase: Phase,
) -> Result<f64> {
    check_aligned(branches, amplitudes)?;
    Ok(0.5
        * branches
            .iter()
            .zip(amplitudes)
            .map(|(b, a)| {
                a.norm_sqr()
                    * b.field.sin2_theta()
                    * (1.0 - b.overlap * phase.mean_cos(b.frequency_ratio()))
            })
            .sum::<f64>())
}

/// Pointer momentum density after tracing out qubit and environment: for each
/// branch, weight cos²(θ_n/2) at +Δp̃_n and sin²(θ_n/2) at −Δp̃_n.
pub fn pointer_mixture(
    branches: &[Branch],
    amplitudes: &[Complex64],
    sigma_p: f64,
) -> Result<PointerMixture> {
    check_aligned(branches, amplitudes)?;
    let mut components = Vec::with_capacity(2 * branches.len());
    for (b, a) in branches.iter().zip(amplitudes) {
        let p = a.norm_sqr();
        let (c, s) = b.field.half_angles();
        components.push(GaussianComponent {
            weight: p * c * c,
            center: b.delta_p,
            width: sigma_p,
        });
        components.push(GaussianComponent {
            weight: p * s * s,
            center: -b.delta_p,
            width: sigma_p,
        });
    }
    Ok(PointerMixture { components })
}

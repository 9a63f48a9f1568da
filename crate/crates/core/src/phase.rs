//! Treatment of the precession phase e^{2iΩT} in the coherence terms.
//!
//! For a branch with environment value b̃, 2ΩT = k·ω₀T with k = √(1 + b̃²).

use std::f64::consts::TAU;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseTreatment {
    /// Use ω₀T as given.
    Fixed,
    /// Average over ω₀T ∈ [Θ, Θ + 2π], Θ the nominal value.
    WindowAveraged,
    /// Delete the oscillatory term outright.
    Dropped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub omega0_t: f64,
    pub treatment: PhaseTreatment,
}

impl Phase {
    pub fn fixed(omega0_t: f64) -> Self {
        Self {
            omega0_t,
            treatment: PhaseTreatment::Fixed,
        }
    }

    pub fn window_averaged(omega0_t: f64) -> Self {
        Self {
            omega0_t,
            treatment: PhaseTreatment::WindowAveraged,
        }
    }

    pub fn dropped() -> Self {
        Self {
            omega0_t: f64::INFINITY,
            treatment: PhaseTreatment::Dropped,
        }
    }

    /// ⟨e^{i k ω₀T}⟩ under this treatment.
    pub fn mean_exp(&self, k: f64) -> Complex64 {
        match self.treatment {
            PhaseTreatment::Fixed => Complex64::from_polar(1.0, k * self.omega0_t),
            PhaseTreatment::WindowAveraged => {
                // (e^{ik(Θ+2π)} − e^{ikΘ}) / (2πik)
                let a = k * self.omega0_t;
                let b = k * (self.omega0_t + TAU);
                let num = Complex64::new(b.sin() - a.sin(), a.cos() - b.cos());
                num / (TAU * k)
            }
            PhaseTreatment::Dropped => Complex64::new(0.0, 0.0),
        }
    }

    /// ⟨cos(k ω₀T)⟩.
    pub fn mean_cos(&self, k: f64) -> f64 {
        self.mean_exp(k).re
    }
}

/// Frequency ratio k = √(1 + b̃²) of a branch relative to ω₀.
pub fn branch_frequency_ratio(b_tilde: f64) -> f64 {
    (1.0 + b_tilde * b_tilde).sqrt()
}

//! Continuum limit: environment fields b̃ distributed as N(0, s_d²).
//!
//! Disturbance probabilities are Gaussian-weighted integrals of the per-branch
//! expressions. The pointer density under the linearized shift
//! cosγ + b̃ cosη sinγ is a convolution of two Gaussians, so every quadrature
//! route here has a closed form to check against.

use std::f64::consts::{PI, SQRT_2, TAU};

use statrs::function::erf::erfc;

use crate::error::{Error, RegimeWarning, Result};
use crate::field::{pointer_shift, sin2_theta, wavepacket_overlap, MeasurementGeometry};
use crate::phase::{branch_frequency_ratio, Phase, PhaseTreatment};
use crate::pointer::{normal_pdf, GaussianComponent, PointerDistribution, PointerMixture};
use crate::quadrature::{self, gaussian_cutoff, integrate_adaptive, uniform_breaks, Tolerance};

/// Relative tolerance for disturbance integrals.
pub const P1_REL_TOL: f64 = 1e-8;

/// Largest s_d treated as weak decoherence.
pub const WEAK_SD: f64 = 0.35;
/// Largest ξ for which the pointer linearization is validated.
pub const WEAK_XI: f64 = 0.1;

fn check_sd(s_d: f64) -> Result<()> {
    if !s_d.is_finite() || s_d < 0.0 {
        return Err(Error::invalid("s_d", format!("{s_d} must be >= 0")));
    }
    Ok(())
}

fn check_sigma(sigma_p: f64) -> Result<()> {
    if !sigma_p.is_finite() || sigma_p <= 0.0 {
        return Err(Error::invalid("sigma_p", format!("{sigma_p} must be > 0")));
    }
    Ok(())
}

/// Gaussian distribution of environment fields with width s_d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity {
    s_d: f64,
}

impl SpectralDensity {
    pub fn new(s_d: f64) -> Result<Self> {
        check_sd(s_d)?;
        Ok(Self { s_d })
    }

    pub fn width(&self) -> f64 {
        self.s_d
    }

    /// s_d = 0 collapses w to δ(b̃).
    pub fn is_delta(&self) -> bool {
        self.s_d == 0.0
    }

    pub fn density(&self, b_tilde: f64) -> Result<f64> {
        spectral_density(b_tilde, self.s_d)
    }
}

/// w(b̃) = (2π s_d²)^{−1/2} exp(−b̃²/2s_d²).
pub fn spectral_density(b_tilde: f64, s_d: f64) -> Result<f64> {
    check_sd(s_d)?;
    if s_d == 0.0 {
        return Err(Error::ZeroWidth);
    }
    Ok(normal_pdf(b_tilde, 0.0, s_d))
}

fn sin2_or_nan(geometry: &MeasurementGeometry, b: f64) -> f64 {
    sin2_theta(geometry, b).unwrap_or(f64::NAN)
}

fn finite_or_fail(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::QuadratureFailure(
            "integrand hit a degenerate net field".into(),
        ))
    }
}

/// P₁ ≈ ½ ∫ w(b̃) sin²θ(b̃) db̃, the long-measurement disturbance probability.
pub fn p1_weak(s_d: f64, geometry: &MeasurementGeometry) -> Result<f64> {
    check_sd(s_d)?;
    if s_d == 0.0 {
        return Ok(0.5 * sin2_theta(geometry, 0.0)?);
    }
    let v = quadrature::gaussian_expectation(|b| 0.5 * sin2_or_nan(geometry, b), s_d, P1_REL_TOL)
        .map_err(|e| match e {
        Error::QuadratureFailure(m) => Error::QuadratureFailure(m),
        other => other,
    })?;
    finite_or_fail(v)
}

/// Full disturbance probability including the coherence term,
/// ½ ∫ w sin²θ [1 − Γ(b̃) cos(2Ω(b̃)T)] db̃ with Ω(b̃)T = (ω₀T/2)√(1+b̃²)
/// and Γ(b̃) the overlap of packets shifted by ±Δp̃(b̃).
pub fn p1_full(
    s_d: f64,
    geometry: &MeasurementGeometry,
    phase: Phase,
    sigma_p: f64,
) -> Result<f64> {
    check_sd(s_d)?;
    check_sigma(sigma_p)?;
    if phase.treatment == PhaseTreatment::Dropped {
        return p1_weak(s_d, geometry);
    }
    if !(phase.omega0_t > 0.0) || !phase.omega0_t.is_finite() {
        return Err(Error::invalid(
            "omega0_t",
            format!("{} must be > 0", phase.omega0_t),
        ));
    }
    let integrand = |b: f64| {
        let overlap = wavepacket_overlap(pointer_shift(geometry, b), sigma_p);
        0.5 * sin2_or_nan(geometry, b) * (1.0 - overlap * phase.mean_cos(branch_frequency_ratio(b)))
    };
    if s_d == 0.0 {
        return finite_or_fail(integrand(0.0));
    }
    let half = gaussian_cutoff(s_d);
    // One panel per period of cos(ω₀T√(1+b̃²)) at most.
    let width = (0.5 * s_d).min(TAU / phase.omega0_t);
    let panels = (2.0 * half / width).ceil();
    const MAX_PANELS: f64 = 4.0e6;
    if panels > MAX_PANELS {
        return Err(Error::QuadratureFailure(format!(
            "{panels} panels needed to resolve omega0*T = {}",
            phase.omega0_t
        )));
    }
    let breaks = uniform_breaks(-half, half, panels as usize);
    let est = integrate_adaptive(
        |b| integrand(b) * normal_pdf(b, 0.0, s_d),
        &breaks,
        Tolerance {
            abs: 1e-14,
            rel: P1_REL_TOL,
            max_intervals: breaks.len() * 8,
        },
    )?;
    finite_or_fail(est.value)
}

/// Mean and variance of the final pointer density over p̃.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerMoments {
    pub mean: f64,
    pub variance: f64,
}

/// mean = cosγ, variance = σ_p̃² + (s_d cosη sinγ)².
pub fn pointer_moments(
    s_d: f64,
    geometry: &MeasurementGeometry,
    sigma_p: f64,
) -> Result<PointerMoments> {
    check_sd(s_d)?;
    check_sigma(sigma_p)?;
    let spread = s_d * geometry.x_projection();
    Ok(PointerMoments {
        mean: geometry.gamma().cos(),
        variance: sigma_p * sigma_p + spread * spread,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointerDensityMethod {
    /// ∫ w(b̃) N(p̃; cosγ + b̃ cosη sinγ, σ²) db̃ by adaptive quadrature.
    Quadrature,
    /// The equivalent single Gaussian with [`pointer_moments`].
    ClosedForm,
    /// Keeps both the + and − branches with weights cos²(θ/2), sin²(θ/2) and
    /// the unexpanded shift Δp̃(b̃), for judging the linearization.
    ExactWeights,
}

fn weak_regime_warning(s_d: f64, geometry: &MeasurementGeometry) -> Option<RegimeWarning> {
    (s_d > WEAK_SD || geometry.xi() > WEAK_XI).then_some(RegimeWarning::OutsideWeakDecoherence {
        s_d,
        xi: geometry.xi(),
    })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("grid", "non-finite grid point"));
    }
    Ok(())
}

/// Final pointer momentum density ρ(p̃) on `grid`.
pub fn pointer_density(
    s_d: f64,
    geometry: &MeasurementGeometry,
    sigma_p: f64,
    grid: &[f64],
    method: PointerDensityMethod,
) -> Result<PointerDistribution> {
    let moments = pointer_moments(s_d, geometry, sigma_p)?;
    check_grid(grid)?;
    let warnings: Vec<RegimeWarning> = weak_regime_warning(s_d, geometry).into_iter().collect();
    let closed = PointerMixture {
        components: vec![GaussianComponent {
            weight: 1.0,
            center: moments.mean,
            width: moments.variance.sqrt(),
        }],
    };
    let density = match method {
        PointerDensityMethod::ClosedForm => closed.evaluate(grid),
        PointerDensityMethod::Quadrature => grid
            .iter()
            .map(|&p| linearized_density_quadrature(s_d, geometry, sigma_p, p))
            .collect::<Result<_>>()?,
        PointerDensityMethod::ExactWeights => grid
            .iter()
            .map(|&p| exact_weight_density(s_d, geometry, sigma_p, p))
            .collect::<Result<_>>()?,
    };
    let mixture = (method != PointerDensityMethod::ExactWeights).then_some(closed);
    Ok(PointerDistribution {
        grid: grid.to_vec(),
        density,
        mixture,
        warnings,
    })
}

fn linearized_density_quadrature(
    s_d: f64,
    geometry: &MeasurementGeometry,
    sigma_p: f64,
    p: f64,
) -> Result<f64> {
    let center = geometry.gamma().cos();
    let slope = geometry.x_projection();
    if s_d == 0.0 {
        return Ok(normal_pdf(p, center, sigma_p));
    }
    let half = gaussian_cutoff(s_d);
    let mut breaks = uniform_breaks(-half, half, 32);
    if slope != 0.0 {
        // The shifted packet is narrow in b̃ when σ ≪ s_d·|slope|; mark it.
        let peak = (p - center) / slope;
        let w = sigma_p / slope.abs();
        breaks.extend(
            [-8.0, -2.0, 0.0, 2.0, 8.0]
                .iter()
                .map(|k| peak + k * w)
                .filter(|b| b.abs() < half),
        );
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
    }
    integrate_adaptive(
        |b| normal_pdf(b, 0.0, s_d) * normal_pdf(p, center + b * slope, sigma_p),
        &breaks,
        Tolerance {
            abs: 1e-13,
            rel: 1e-12,
            max_intervals: 20_000,
        },
    )
    .map(|e| e.value)
}

fn exact_weight_density(
    s_d: f64,
    geometry: &MeasurementGeometry,
    sigma_p: f64,
    p: f64,
) -> Result<f64> {
    let term = |b: f64| -> f64 {
        let Ok(field) = crate::field::effective_field(geometry, b) else {
            return f64::NAN;
        };
        let (c, s) = field.half_angles();
        let shift = pointer_shift(geometry, b);
        c * c * normal_pdf(p, shift, sigma_p) + s * s * normal_pdf(p, -shift, sigma_p)
    };
    if s_d == 0.0 {
        return finite_or_fail(term(0.0));
    }
    let half = gaussian_cutoff(s_d);
    let panels = ((2.0 * half) / sigma_p.min(s_d)).ceil().clamp(32.0, 4096.0) as usize;
    let est = integrate_adaptive(
        |b| normal_pdf(b, 0.0, s_d) * term(b),
        &uniform_breaks(-half, half, panels),
        Tolerance {
            abs: 1e-12,
            rel: 1e-10,
            max_intervals: 200_000,
        },
    )?;
    finite_or_fail(est.value)
}

/// P₊ = ∫_{−1}^{∞} w(b̃) db̃, the chance that a z-axis environment leaves the
/// protection field pointing along +z.
pub fn zaxis_success_probability(s_d: f64) -> Result<f64> {
    check_sd(s_d)?;
    if s_d == 0.0 {
        return Ok(1.0);
    }
    Ok(0.5 * erfc(-1.0 / (SQRT_2 * s_d)))
}

/// Pointer density for a z-axis environment: P₊·N(+cosγ, σ²) + (1−P₊)·N(−cosγ, σ²).
/// Neither component is broadened.
pub fn zaxis_pointer_density(
    s_d: f64,
    gamma: f64,
    sigma_p: f64,
    grid: &[f64],
) -> Result<PointerDistribution> {
    check_sigma(sigma_p)?;
    check_grid(grid)?;
    if !(0.0..=PI).contains(&gamma) {
        return Err(Error::invalid("gamma", format!("{gamma} not in [0, pi]")));
    }
    let p_plus = zaxis_success_probability(s_d)?;
    let shift = gamma.cos();
    let mixture = PointerMixture {
        components: vec![
            GaussianComponent {
                weight: p_plus,
                center: shift,
                width: sigma_p,
            },
            GaussianComponent {
                weight: 1.0 - p_plus,
                center: -shift,
                width: sigma_p,
            },
        ],
    };
    Ok(PointerDistribution {
        grid: grid.to_vec(),
        density: mixture.evaluate(grid),
        mixture: Some(mixture),
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZAxisExpansion {
    /// χ to first order in ξ.
    pub chi: f64,
    /// +1 for the correct shift, −1 for the reversed one (b̃ < −1).
    pub shift_sign: f64,
}

/// First-order χ ≈ |1 + b̃| + ξ cosγ·sign(1 + b̃) for a z-axis environment.
pub fn zaxis_chi_expansion(xi: f64, gamma: f64, b_tilde: f64) -> Result<ZAxisExpansion> {
    let base = 1.0 + b_tilde;
    if base == 0.0 {
        return Err(Error::SingularPoint);
    }
    let sign = base.signum();
    Ok(ZAxisExpansion {
        chi: base.abs() + xi * gamma.cos() * sign,
        shift_sign: sign,
    })
}

/// Exact χ for a z-axis environment field.
pub fn zaxis_chi(xi: f64, gamma: f64, b_tilde: f64) -> f64 {
    let cg = gamma.cos();
    (1.0 + b_tilde * b_tilde + xi * xi + 2.0 * b_tilde + 2.0 * b_tilde * xi * cg + 2.0 * xi * cg)
        .sqrt()
}

/// Environment strength for a general qubit: either the raw energy scale ε
/// (J) or directly the relative width s_d = ε/(ħω₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvStrength {
    Energy(f64),
    Relative(f64),
}

/// Protective measurement of a generic qubit with coupling κ(t) = ζ/T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralQubitConfig {
    /// ζ, action units (J·s per unit of k).
    pub zeta: f64,
    /// ω₀, rad/s.
    pub omega0: f64,
    /// T, s.
    pub duration: f64,
    /// Value of the pointer-operator variable k.
    pub k: f64,
    /// Width σ_ℓ of the packet in the variable conjugate to k.
    pub sigma_ell: f64,
    pub env: EnvStrength,
    pub gamma: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralQubitMapping {
    pub xi: f64,
    /// s_d = ε/(ħω₀).
    pub b_tilde_scale: f64,
    /// Pointer shift in ℓ, ζ cosγ.
    pub shift: f64,
    /// σ_ℓ² + (ζ s_d cosη sinγ)².
    pub variance: f64,
    pub warnings: Vec<RegimeWarning>,
}

pub fn general_qubit_map(config: &GeneralQubitConfig) -> Result<GeneralQubitMapping> {
    let c = config;
    for (name, v) in [
        ("zeta", c.zeta),
        ("omega0", c.omega0),
        ("T", c.duration),
        ("sigma_ell", c.sigma_ell),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(name, format!("{v} must be > 0")));
        }
    }
    let omega0_t = c.omega0 * c.duration;
    let xi = 2.0 * c.zeta * c.k / (crate::units::HBAR * omega0_t);
    if !xi.is_finite() || xi < 0.0 {
        return Err(Error::invalid(
            "k",
            format!("derived xi = {xi} must be >= 0"),
        ));
    }
    let s_d = match c.env {
        EnvStrength::Energy(eps) => eps / (crate::units::HBAR * c.omega0),
        EnvStrength::Relative(s) => s,
    };
    let geometry = MeasurementGeometry::new(c.gamma, c.eta, xi)?;
    // Same algebra as the Stern–Gerlach case with p → ℓ and μβ → ζ.
    let reduced = pointer_moments(s_d, &geometry, c.sigma_ell / c.zeta)?;
    let mut warnings: Vec<RegimeWarning> = geometry.regime_warning().into_iter().collect();
    if omega0_t <= 10.0 {
        warnings.push(RegimeWarning::ShortMeasurement { omega0_t });
    }
    Ok(GeneralQubitMapping {
        xi,
        b_tilde_scale: s_d,
        shift: c.zeta * reduced.mean,
        variance: c.zeta * c.zeta * reduced.variance,
        warnings,
    })
}

//! Dimensionless field geometry shared by every engine.
//!
//! Fields are in units of the protection field B₀, pointer momenta in units
//! of μβ, and the measurement strength is ξ = βq/(B₀T). The net field for an
//! environment value b̃ along x is
//!
//! ```text
//! B/B₀ = (ξ cosη sinγ + b̃,  ξ sinη sinγ,  1 + ξ cosγ)
//! ```

use std::f64::consts::{PI, TAU};

use crate::error::{Error, RegimeWarning, Result};

/// Below this magnitude the net-field direction is treated as undefined.
pub const DEGENERATE_CHI: f64 = 1e-12;

/// Orientation (γ, η) of the measurement axis m̂ and strength ξ of the
/// measurement field relative to the protection field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementGeometry {
    gamma: f64,
    eta: f64,
    xi: f64,
}

impl MeasurementGeometry {
    /// `gamma` must lie in [0, π] and `xi` must be non-negative. `eta` is
    /// wrapped into [0, 2π).
    pub fn new(gamma: f64, eta: f64, xi: f64) -> Result<Self> {
        if !gamma.is_finite() || !(0.0..=PI).contains(&gamma) {
            return Err(Error::invalid("gamma", format!("{gamma} not in [0, pi]")));
        }
        if !eta.is_finite() {
            return Err(Error::invalid("eta", format!("{eta} is not finite")));
        }
        if !xi.is_finite() || xi < 0.0 {
            return Err(Error::invalid("xi", format!("{xi} must be >= 0")));
        }
        let eta = eta.rem_euclid(TAU);
        // rem_euclid can round up to exactly 2π for tiny negative inputs
        let eta = if eta >= TAU { 0.0 } else { eta };
        Ok(Self { gamma, eta, xi })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn with_xi(self, xi: f64) -> Result<Self> {
        Self::new(self.gamma, self.eta, xi)
    }

    /// cosη·sinγ, the projection of m̂ onto the environment-field axis.
    pub fn x_projection(&self) -> f64 {
        self.eta.cos() * self.gamma.sin()
    }

    /// Set when ξ ≥ 1.
    pub fn regime_warning(&self) -> Option<RegimeWarning> {
        (self.xi >= 1.0).then_some(RegimeWarning::StrongMeasurement { xi: self.xi })
    }

    /// Unnormalized net field (B/B₀) for environment value `b_tilde`.
    pub fn net_field(&self, b_tilde: f64) -> [f64; 3] {
        let (sg, cg) = self.gamma.sin_cos();
        let (se, ce) = self.eta.sin_cos();
        [
            self.xi * ce * sg + b_tilde,
            self.xi * se * sg,
            1.0 + self.xi * cg,
        ]
    }
}

/// Unit vector m̂ = (cosη sinγ, sinη sinγ, cosγ).
pub fn measurement_axis(geometry: &MeasurementGeometry) -> [f64; 3] {
    let (sg, cg) = geometry.gamma.sin_cos();
    let (se, ce) = geometry.eta.sin_cos();
    [ce * sg, se * sg, cg]
}

/// Net field felt by the qubit in one environment branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveField {
    /// Magnitude in units of B₀.
    pub chi: f64,
    /// Polar angle of the net field.
    pub theta: f64,
    /// Azimuthal angle; 0 when the field is along ±z.
    pub phi: f64,
    /// Unit direction.
    pub r: [f64; 3],
}

impl EffectiveField {
    /// sin²θ computed from the transverse components, free of the
    /// cancellation in 1 − cos²θ.
    pub fn sin2_theta(&self) -> f64 {
        self.r[0] * self.r[0] + self.r[1] * self.r[1]
    }

    /// (cos(θ/2), sin(θ/2)) via half-angle identities on r_z.
    pub fn half_angles(&self) -> (f64, f64) {
        let rz = self.r[2].clamp(-1.0, 1.0);
        (((1.0 + rz) / 2.0).sqrt(), ((1.0 - rz) / 2.0).sqrt())
    }
}

pub fn effective_field(geometry: &MeasurementGeometry, b_tilde: f64) -> Result<EffectiveField> {
    let [bx, by, bz] = geometry.net_field(b_tilde);
    let chi = (bx * bx + by * by + bz * bz).sqrt();
    if !(chi >= DEGENERATE_CHI) {
        return Err(Error::DegenerateField { chi });
    }
    let r = [bx / chi, by / chi, bz / chi];
    // atan2 keeps full relative precision for θ near 0 and π, unlike acos
    let theta = bx.hypot(by).atan2(bz);
    let phi = if r[0] == 0.0 && r[1] == 0.0 {
        0.0
    } else {
        r[1].atan2(r[0])
    };
    Ok(EffectiveField { chi, theta, phi, r })
}

/// Pointer shift Δp̃ = (cosγ + b̃ cosη sinγ)/√(1 + b̃²) in units of μβ.
///
/// This is the expectation value of σ·m̂ in the upper eigenstate of the
/// environment-modified protection Hamiltonian.
pub fn pointer_shift(geometry: &MeasurementGeometry, b_tilde: f64) -> f64 {
    (geometry.gamma.cos() + b_tilde * geometry.x_projection()) / (1.0 + b_tilde * b_tilde).sqrt()
}

/// sin²θ of the net field.
pub fn sin2_theta(geometry: &MeasurementGeometry, b_tilde: f64) -> Result<f64> {
    effective_field(geometry, b_tilde).map(|f| f.sin2_theta())
}

/// Amplitude overlap Γ = ⟨Φ(+Δp̃)|Φ(−Δp̃)⟩ of two Gaussian pointer packets
/// with momentum-density width `width`, shifted by ±`delta_p`.
pub fn wavepacket_overlap(delta_p: f64, width: f64) -> f64 {
    debug_assert!(width > 0.0, "pointer width must be positive");
    (-delta_p * delta_p / (2.0 * width * width)).exp()
}

/// Upper bound sin²θ on the measurement-only disturbance probability.
pub fn disturbance_bound(xi: f64, gamma: f64) -> f64 {
    let (sg, cg) = gamma.sin_cos();
    xi * xi * sg * sg / (1.0 + xi * xi + 2.0 * xi * cg)
}

/// ½ sin²θ: the measurement-only disturbance once the cos(ω₀T) term averages
/// out.
pub fn averaged_disturbance(xi: f64, gamma: f64) -> f64 {
    0.5 * disturbance_bound(xi, gamma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundMaximum {
    pub gamma: f64,
    pub bound: f64,
}

/// Maximizes [`disturbance_bound`] over γ ∈ [0, π] by golden-section search.
///
/// The bound is unimodal in γ, peaking at cosγ = −ξ (value ξ²) for ξ < 1 and
/// at cosγ = −1/ξ (value 1) for ξ ≥ 1.
pub fn max_disturbance_bound(xi: f64) -> BoundMaximum {
    if xi == 0.0 {
        return BoundMaximum {
            gamma: PI / 2.0,
            bound: 0.0,
        };
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, PI);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (disturbance_bound(xi, c), disturbance_bound(xi, d));
    while b - a > 1e-12 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = disturbance_bound(xi, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = disturbance_bound(xi, d);
        }
    }
    let gamma = 0.5 * (a + b);
    BoundMaximum {
        gamma,
        bound: disturbance_bound(xi, gamma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn geom(gamma: f64, eta: f64, xi: f64) -> MeasurementGeometry {
        MeasurementGeometry::new(gamma, eta, xi).unwrap()
    }

    #[test]
    fn axis_examples() {
        let z = measurement_axis(&geom(0.0, 1.3, 0.1));
        assert_abs_diff_eq!(z[0], 0.0);
        assert_abs_diff_eq!(z[1], 0.0);
        assert_abs_diff_eq!(z[2], 1.0);
        let x = measurement_axis(&geom(FRAC_PI_2, 0.0, 0.1));
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x[2], 0.0, epsilon = 1e-15);
        let d = measurement_axis(&geom(FRAC_PI_4, 0.0, 0.1));
        assert_abs_diff_eq!(d[0], FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1], 0.0);
        assert_abs_diff_eq!(d[2], FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn geometry_validation() {
        assert!(MeasurementGeometry::new(-0.1, 0.0, 0.1).is_err());
        assert!(MeasurementGeometry::new(3.2, 0.0, 0.1).is_err());
        assert!(MeasurementGeometry::new(1.0, 0.0, -0.1).is_err());
        assert!(MeasurementGeometry::new(1.0, f64::NAN, 0.1).is_err());
        let g = geom(1.0, -FRAC_PI_2, 0.1);
        assert_abs_diff_eq!(g.eta(), 3.0 * FRAC_PI_2, epsilon = 1e-15);
        assert!(g.regime_warning().is_none());
        assert!(geom(1.0, 0.0, 1.0).regime_warning().is_some());
    }

    #[test]
    fn protection_field_only() {
        let f = effective_field(&geom(0.7, 2.0, 0.0), 0.0).unwrap();
        assert_eq!(f.chi, 1.0);
        assert_eq!(f.r, [0.0, 0.0, 1.0]);
        assert_eq!(f.theta, 0.0);
        assert_eq!(f.phi, 0.0);
    }

    #[test]
    fn transverse_measurement_field() {
        let f = effective_field(&geom(FRAC_PI_2, 0.0, 0.1), 0.0).unwrap();
        let chi = 1.01f64.sqrt();
        assert_abs_diff_eq!(f.chi, chi, epsilon = 1e-12);
        assert_abs_diff_eq!(f.chi, 1.00499, epsilon = 1e-5);
        assert_abs_diff_eq!(f.r[0], 0.1 / chi, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r[2], 1.0 / chi, epsilon = 1e-12);
    }

    #[test]
    fn strong_environment_tilts_field_to_x() {
        let f = effective_field(&geom(0.3, 0.0, 0.0), 1e9).unwrap();
        assert_abs_diff_eq!(f.theta, FRAC_PI_2, epsilon = 1e-8);
    }

    #[test]
    fn degenerate_point_is_an_error() {
        // ξ = 1 along −z cancels B₀ exactly.
        let g = geom(PI, 0.0, 1.0);
        assert!(matches!(
            effective_field(&g, 0.0),
            Err(Error::DegenerateField { .. })
        ));
        assert!(sin2_theta(&g, 0.0).is_err());
    }

    #[test]
    fn pointer_shift_examples() {
        for gamma in [0.0, 0.4, 1.2, 2.9] {
            assert_abs_diff_eq!(pointer_shift(&geom(gamma, 0.3, 0.1), 0.0), gamma.cos());
        }
        assert_abs_diff_eq!(
            pointer_shift(&geom(FRAC_PI_2, 0.0, 0.1), 1.0),
            FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
        let v = pointer_shift(&geom(FRAC_PI_4, FRAC_PI_2, 0.1), 5.0);
        assert_abs_diff_eq!(v, FRAC_PI_4.cos() / 26f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.13867, epsilon = 1e-5);
    }

    #[test]
    fn sin2_theta_examples() {
        let v = sin2_theta(&geom(FRAC_PI_2, 0.0, 0.1), 0.0).unwrap();
        assert_abs_diff_eq!(v, 0.01 / 1.01, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.009901, epsilon = 1e-6);
        assert_eq!(sin2_theta(&geom(1.0, 0.0, 0.0), 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            sin2_theta(&geom(1.0, 0.0, 0.0), 1.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(wavepacket_overlap(0.0, 0.03), 1.0);
        let g = wavepacket_overlap(0.05, 0.03);
        assert_abs_diff_eq!(g, 0.2494, epsilon = 1e-4);
        assert_abs_diff_eq!(g * g, 0.0622, epsilon = 1e-4);
        assert!(g * g < 0.1);
    }

    #[test]
    fn bound_examples() {
        let b = disturbance_bound(0.1, FRAC_PI_2);
        assert_abs_diff_eq!(b, 0.01 / 1.01, epsilon = 1e-15);
        assert!(b <= 0.01);
        assert_eq!(disturbance_bound(0.0, 1.1), 0.0);
        assert_abs_diff_eq!(
            disturbance_bound(0.4, FRAC_PI_2),
            0.16 / 1.16,
            epsilon = 1e-15
        );
        // The "7%" figure at ξ = 0.4 is the phase-averaged value at γ = π/2.
        assert_abs_diff_eq!(averaged_disturbance(0.4, FRAC_PI_2), 0.069, epsilon = 1e-3);
    }

    #[test]
    fn gamma_maximized_bound() {
        for xi in [0.05, 0.1, 0.4, 0.8] {
            let m = max_disturbance_bound(xi);
            assert_abs_diff_eq!(m.bound, xi * xi, epsilon = 1e-12);
            assert_abs_diff_eq!(m.gamma, (-xi).acos(), epsilon = 1e-5);
        }
        for xi in [1.5, 3.0] {
            let m = max_disturbance_bound(xi);
            assert_abs_diff_eq!(m.bound, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m.gamma, (-1.0 / xi).acos(), epsilon = 1e-5);
        }
        assert_eq!(max_disturbance_bound(0.0).bound, 0.0);
    }
}

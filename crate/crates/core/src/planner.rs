//! Stern–Gerlach experiment planning in SI units.
//!
//! An atom with magnetic moment μ crosses a region of length d with field
//! gradient |∇B| at the most probable oven speed v = √(2k_B T/m). The force
//! component along the gradient is μ|∇B|(cosγ + s sinγ) when an extra field
//! s·B₀ is applied along x, giving a displacement ½(F/m)(d/v)².

use std::fmt;

use crate::continuum::p1_weak;
use crate::error::{Error, RegimeWarning, Result};
use crate::field::{disturbance_bound, max_disturbance_bound, BoundMaximum, MeasurementGeometry};
use crate::params::{ConfigError, Params};
use crate::units::{species_mass, K_B};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApparatusParams {
    /// Magnetic moment, J/T.
    pub mu: f64,
    /// |∇B| of the measurement field, T/m.
    pub grad_b: f64,
    /// Length of the measurement region, m.
    pub d: f64,
    /// Oven temperature, K.
    pub t_oven: f64,
    /// Protection field, T.
    pub b0: f64,
    /// Atomic mass, kg.
    pub mass: f64,
    /// Polar angle of the measurement axis, rad.
    pub gamma: f64,
}

impl ApparatusParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu", self.mu),
            ("grad_B", self.grad_b),
            ("d", self.d),
            ("T_oven", self.t_oven),
            ("B0", self.b0),
            ("mass", self.mass),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("{v} must be > 0")));
            }
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.gamma) {
            return Err(Error::invalid(
                "gamma",
                format!("{} not in [0, pi]", self.gamma),
            ));
        }
        Ok(())
    }

    /// Reads the apparatus keys and `s_d` from a parameter file.
    ///
    /// `mass_or_species` takes a mass in kg or a name from
    /// [`crate::units::SPECIES`]. A beam speed may be given as `speed` (m/s)
    /// instead of `T_oven`; it is converted to the oven temperature with the
    /// same most-probable speed.
    pub fn from_params(p: &mut Params) -> std::result::Result<(Self, f64), ConfigError> {
        let mu = p.require_f64("mu")?;
        let grad_b = p.require_f64("grad_B")?;
        let d = p.require_f64("d")?;
        let b0 = p.require_f64("B0")?;
        let gamma_deg = p.require_f64("gamma_deg")?;
        let s_d = p.take_f64("s_d")?.unwrap_or(0.0);
        let (species, at) =
            p.take_str("mass_or_species")
                .ok_or_else(|| ConfigError::MissingKey {
                    key: "mass_or_species".into(),
                })?;
        let mass = match species.parse::<f64>() {
            Ok(m) => m,
            Err(_) => species_mass(&species).ok_or_else(|| ConfigError::BadValue {
                at,
                key: "mass_or_species".into(),
                value: species.clone(),
                expected: "a mass in kg or a known species (K-39, Na-23, Rb-87, Cs-133)",
            })?,
        };
        let t_oven = match (p.take_f64("T_oven")?, p.take_f64("speed")?) {
            (Some(t), None) => t,
            (None, Some(v)) => mass * v * v / (2.0 * K_B),
            (Some(_), Some(_)) => {
                return Err(p.out_of_range("speed", "give either T_oven or speed, not both"))
            }
            (None, None) => {
                return Err(ConfigError::MissingKey {
                    key: "T_oven".into(),
                })
            }
        };
        let params = Self {
            mu,
            grad_b,
            d,
            t_oven,
            b0,
            mass,
            gamma: gamma_deg.to_radians(),
        };
        let checks: [(&str, f64); 5] = [
            ("mu", mu),
            ("grad_B", grad_b),
            ("d", d),
            ("B0", b0),
            ("mass_or_species", mass),
        ];
        for (key, v) in checks {
            if !(v > 0.0) {
                return Err(p.out_of_range(key, format!("{v} must be > 0")));
            }
        }
        if !(t_oven > 0.0) {
            let key = if p.contains("speed") {
                "speed"
            } else {
                "T_oven"
            };
            return Err(p.out_of_range(key, "must be > 0"));
        }
        if !(0.0..=180.0).contains(&gamma_deg) {
            return Err(p.out_of_range("gamma_deg", format!("{gamma_deg} not in [0, 180]")));
        }
        if s_d < 0.0 {
            return Err(p.out_of_range("s_d", format!("{s_d} must be >= 0")));
        }
        p.finish()?;
        Ok((params, s_d))
    }
}

/// v = √(2k_B T/m), m/s.
pub fn most_probable_speed(t_oven: f64, mass: f64) -> Result<f64> {
    if !(t_oven > 0.0) || !(mass > 0.0) {
        return Err(Error::invalid("T_oven/mass", "must be > 0"));
    }
    Ok((2.0 * K_B * t_oven / mass).sqrt())
}

fn force_factor(gamma: f64, s: f64) -> f64 {
    gamma.cos() + s * gamma.sin()
}

/// Δs = μ|∇B|(cosγ + s sinγ)d²/(4k_B T), m. Signed along the gradient.
pub fn displacement(params: &ApparatusParams, s: f64) -> f64 {
    params.mu * params.grad_b * force_factor(params.gamma, s) * params.d * params.d
        / (4.0 * K_B * params.t_oven)
}

/// The same displacement computed kinematically, ½(F/m)t² with t = d/v.
pub fn displacement_kinematic(params: &ApparatusParams, s: f64) -> Result<f64> {
    let v = most_probable_speed(params.t_oven, params.mass)?;
    let t = params.d / v;
    Ok(params.mu * params.grad_b * force_factor(params.gamma, s) / (2.0 * params.mass) * t * t)
}

/// ξ = |∇B|·d/B₀.
pub fn field_parameter_xi(params: &ApparatusParams) -> Result<f64> {
    if !(params.b0 > 0.0) {
        return Err(Error::invalid("B0", "must be > 0"));
    }
    Ok(params.grad_b * params.d / params.b0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// ξ ≤ 0.1: the measurement disturbs the state by at most ~ξ²/2.
    Protective,
    /// 0.1 < ξ < 1.
    Weak,
    /// ξ ≥ 1.
    Strong,
}

impl Regime {
    pub fn of(xi: f64) -> Self {
        if xi <= 0.1 {
            Regime::Protective
        } else if xi < 1.0 {
            Regime::Weak
        } else {
            Regime::Strong
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Protective => "protective (xi <= 0.1)",
            Regime::Weak => "weak (0.1 < xi < 1)",
            Regime::Strong => "strong (xi >= 1)",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanReport {
    pub s_d: f64,
    /// m/s.
    pub speed: f64,
    /// s.
    pub transit_time: f64,
    /// |Δs| without environment field, m.
    pub displacement_0: f64,
    /// |Δs| with an extra field s_d·B₀ along x, m.
    pub displacement_env: f64,
    /// |Δs(s_d) − Δs(0)|, m.
    pub spread: f64,
    pub xi: f64,
    /// Largest sin²θ(b̃ = 0) over γ at this ξ.
    pub disturbance_bound: BoundMaximum,
    /// sin²θ(b̃ = 0) at the apparatus γ.
    pub bound_at_gamma: f64,
    /// Δs(s_d)/Δs(0) − 1 from the linear force factor cosγ + s sinγ.
    pub relative_change_linear: f64,
    /// Same with the unexpanded factor (cosγ + s sinγ)/√(1 + s²).
    pub relative_change_nonlinear: f64,
    /// Long-measurement disturbance with environment width s_d (η = 0).
    pub p1_weak: f64,
    pub regime: Regime,
    pub warnings: Vec<RegimeWarning>,
}

pub fn plan(params: &ApparatusParams, s_d: f64) -> Result<PlanReport> {
    params.validate()?;
    if !(s_d >= 0.0) || !s_d.is_finite() {
        return Err(Error::invalid("s_d", format!("{s_d} must be >= 0")));
    }
    let speed = most_probable_speed(params.t_oven, params.mass)?;
    let xi = field_parameter_xi(params)?;
    let d0 = displacement(params, 0.0);
    let d1 = displacement(params, s_d);
    let base = force_factor(params.gamma, 0.0);
    let nonlinear = force_factor(params.gamma, s_d) / (1.0 + s_d * s_d).sqrt();
    let geometry = MeasurementGeometry::new(params.gamma, 0.0, xi)?;
    Ok(PlanReport {
        s_d,
        speed,
        transit_time: params.d / speed,
        displacement_0: d0.abs(),
        displacement_env: d1.abs(),
        spread: (d1 - d0).abs(),
        xi,
        disturbance_bound: max_disturbance_bound(xi),
        bound_at_gamma: disturbance_bound(xi, params.gamma),
        relative_change_linear: d1 / d0 - 1.0,
        relative_change_nonlinear: nonlinear / base - 1.0,
        p1_weak: p1_weak(s_d, &geometry)?,
        regime: Regime::of(xi),
        warnings: geometry.regime_warning().into_iter().collect(),
    })
}

impl PlanReport {
    pub const CSV_HEADER: [&'static str; 15] = [
        "s_d",
        "speed_m_per_s",
        "transit_time_s",
        "displacement_0_m",
        "displacement_env_m",
        "spread_m",
        "xi",
        "bound_max",
        "gamma_at_bound_max_rad",
        "bound_at_gamma",
        "relative_change_linear",
        "relative_change_nonlinear",
        "p1_weak",
        "regime",
        "warnings",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        use crate::curves::format_number as f;
        let regime = match self.regime {
            Regime::Protective => "protective",
            Regime::Weak => "weak",
            Regime::Strong => "strong",
        };
        vec![
            f(self.s_d),
            f(self.speed),
            f(self.transit_time),
            f(self.displacement_0),
            f(self.displacement_env),
            f(self.spread),
            f(self.xi),
            f(self.disturbance_bound.bound),
            f(self.disturbance_bound.gamma),
            f(self.bound_at_gamma),
            f(self.relative_change_linear),
            f(self.relative_change_nonlinear),
            f(self.p1_weak),
            regime.to_string(),
            self.warnings.len().to_string(),
        ]
    }
}

impl fmt::Display for PlanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "most probable speed     {:.4} m/s", self.speed)?;
        writeln!(f, "transit time            {:.6e} s", self.transit_time)?;
        writeln!(
            f,
            "displacement, s = 0     {:.6} mm",
            self.displacement_0 * 1e3
        )?;
        writeln!(
            f,
            "displacement, s = {:<5} {:.6} mm",
            self.s_d,
            self.displacement_env * 1e3
        )?;
        writeln!(f, "displacement spread     {:.6} mm", self.spread * 1e3)?;
        writeln!(
            f,
            "relative change         {:.2}% (linear), {:.2}% (nonlinear)",
            100.0 * self.relative_change_linear,
            100.0 * self.relative_change_nonlinear
        )?;
        writeln!(f, "xi                      {:.6}", self.xi)?;
        writeln!(f, "regime                  {}", self.regime)?;
        writeln!(
            f,
            "disturbance bound       {:.6} at this gamma",
            self.bound_at_gamma
        )?;
        writeln!(
            f,
            "                        {:.6} maximum, at gamma = {:.2} deg",
            self.disturbance_bound.bound,
            self.disturbance_bound.gamma.to_degrees()
        )?;
        writeln!(f, "P1 with environment     {:.6}", self.p1_weak)?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::FRAC_PI_4;

    fn potassium() -> ApparatusParams {
        ApparatusParams {
            mu: 9.3e-24,
            grad_b: 40.0,
            d: 0.1,
            t_oven: 420.0,
            b0: 10.0,
            mass: 6.4923e-26,
            gamma: FRAC_PI_4,
        }
    }

    #[test]
    fn speed_examples() {
        let v = most_probable_speed(420.0, 6.49e-26).unwrap();
        assert!((415.0..430.0).contains(&v), "{v}");
        assert_relative_eq!(
            most_probable_speed(1680.0, 6.49e-26).unwrap(),
            2.0 * v,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            most_probable_speed(420.0, 4.0 * 6.49e-26).unwrap(),
            0.5 * v,
            max_relative = 1e-14
        );
        assert!(most_probable_speed(0.0, 1.0).is_err());
    }

    #[test]
    fn displacement_examples() {
        let p = potassium();
        assert_abs_diff_eq!(displacement(&p, 0.0) * 1e3, 0.11, epsilon = 0.01);
        assert_abs_diff_eq!(displacement(&p, 0.2) * 1e3, 0.14, epsilon = 0.005);
        let p0 = ApparatusParams { gamma: 0.0, ..p };
        assert_eq!(displacement(&p0, 0.0), displacement(&p0, 3.0));
        for s in [0.0, 0.2, 1.0] {
            assert_relative_eq!(
                displacement(&p, s),
                displacement_kinematic(&p, s).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn xi_examples() {
        assert_relative_eq!(
            field_parameter_xi(&potassium()).unwrap(),
            0.4,
            max_relative = 1e-15
        );
        let p = ApparatusParams {
            grad_b: 0.04,
            d: 1.0,
            b0: 1.0,
            ..potassium()
        };
        assert_relative_eq!(field_parameter_xi(&p).unwrap(), 0.04, max_relative = 1e-15);
        assert!(field_parameter_xi(&ApparatusParams {
            b0: 0.0,
            ..potassium()
        })
        .is_err());
    }

    #[test]
    fn plan_examples() {
        let r = plan(&potassium(), 0.2).unwrap();
        assert_abs_diff_eq!(r.spread * 1e3, 0.03, epsilon = 0.01);
        assert_abs_diff_eq!(r.relative_change_linear, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(r.relative_change_nonlinear, 0.177, epsilon = 1e-3);
        assert_eq!(r.regime, Regime::Weak);
        assert_abs_diff_eq!(r.disturbance_bound.bound, 0.16, epsilon = 1e-9);
        assert_eq!(plan(&potassium(), 0.0).unwrap().spread, 0.0);
        assert!(r.to_string().contains("mm"));
        assert_eq!(r.csv_row().len(), PlanReport::CSV_HEADER.len());
    }

    #[test]
    fn param_file() {
        let text = "mu = 9.3e-24\ngrad_B = 40\nd = 0.1\nT_oven = 420\nB0 = 10\n\
                    mass_or_species = K-39\ngamma_deg = 45\ns_d = 0.2\n";
        let (p, s_d) = ApparatusParams::from_params(&mut Params::parse(text).unwrap()).unwrap();
        assert_eq!(p, potassium());
        assert_eq!(s_d, 0.2);

        let missing = text.replace("B0 = 10\n", "");
        let err = ApparatusParams::from_params(&mut Params::parse(&missing).unwrap()).unwrap_err();
        assert_eq!(err.key(), Some("B0"));

        let cold = "mu = 9.27e-24\ngrad_B = 1e-3\nd = 0.01\nspeed = 0.01\nB0 = 1e-4\n\
                    mass_or_species = Rb-87\ngamma_deg = 45\n";
        let (p, _) = ApparatusParams::from_params(&mut Params::parse(cold).unwrap()).unwrap();
        assert_relative_eq!(
            most_probable_speed(p.t_oven, p.mass).unwrap(),
            0.01,
            max_relative = 1e-12
        );
        let r = plan(&p, 0.0).unwrap();
        assert_relative_eq!(r.xi, 0.1, max_relative = 1e-12);
        assert_eq!(r.regime, Regime::Protective);

        let bad = text.replace("K-39", "Xx-1");
        let err = ApparatusParams::from_params(&mut Params::parse(&bad).unwrap()).unwrap_err();
        assert_eq!(err.key(), Some("mass_or_species"));
    }
}

//! Gaussian pointer packets and mixtures over the dimensionless momentum p̃.

use std::f64::consts::PI;

use crate::error::{Error, RegimeWarning, Result};

/// Initial pointer momentum density: normal with mean `center` and standard
/// deviation `width` (σ_p̃ = σ_p/μβ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPointer {
    pub center: f64,
    pub width: f64,
}

impl GaussianPointer {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::invalid("sigma_p", format!("{width} must be > 0")));
        }
        if !center.is_finite() {
            return Err(Error::invalid("center", "not finite"));
        }
        Ok(Self { center, width })
    }

    /// |Φ(p̃)|².
    pub fn density(&self, p: f64) -> f64 {
        normal_pdf(p, self.center, self.width)
    }

    /// Φ(p̃), the real wave function whose square is [`Self::density`].
    pub fn amplitude(&self, p: f64) -> f64 {
        let s2 = self.width * self.width;
        (2.0 * PI * s2).powf(-0.25) * (-(p - self.center).powi(2) / (4.0 * s2)).exp()
    }
}

pub fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub center: f64,
    pub width: f64,
}

/// Incoherent mixture of Gaussian pointer densities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointerMixture {
    pub components: Vec<GaussianComponent>,
}

impl PointerMixture {
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn density(&self, p: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * normal_pdf(p, c.center, c.width))
            .sum()
    }

    pub fn evaluate(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&p| self.density(p)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.center)
            .sum::<f64>()
            / self.total_weight()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.components
            .iter()
            .map(|c| c.weight * (c.width * c.width + (c.center - m).powi(2)))
            .sum::<f64>()
            / self.total_weight()
    }
}

/// Pointer density sampled on a grid, with mixture parameters when the
/// density is exactly a Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerDistribution {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub mixture: Option<PointerMixture>,
    pub warnings: Vec<RegimeWarning>,
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn density_integrates_to_one() {
        let g = GaussianPointer::new(0.3, 0.03).unwrap();
        let grid = linspace(-1.0, 1.6, 20_001);
        let h = grid[1] - grid[0];
        let total: f64 = grid.iter().map(|&p| g.density(p)).sum::<f64>() * h;
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        let amp2 = g.amplitude(0.31).powi(2);
        assert_abs_diff_eq!(amp2, g.density(0.31), epsilon = 1e-12);
    }

    #[test]
    fn rejects_nonpositive_width() {
        assert!(GaussianPointer::new(0.0, 0.0).is_err());
        assert!(GaussianPointer::new(0.0, -1.0).is_err());
    }

    #[test]
    fn mixture_moments() {
        let m = PointerMixture {
            components: vec![
                GaussianComponent {
                    weight: 0.75,
                    center: 1.0,
                    width: 0.1,
                },
                GaussianComponent {
                    weight: 0.25,
                    center: -1.0,
                    width: 0.1,
                },
            ],
        };
        assert_abs_diff_eq!(m.mean(), 0.5);
        assert_abs_diff_eq!(
            m.variance(),
            0.01 + 0.75 * 0.25 + 0.25 * 2.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 3.0, 400);
        assert_eq!(g.len(), 400);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[399], 3.0);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }
}

//! Parameter scans of a scalar output over a grid of (s_d, γ, η, ξ, σ_p̃).
//!
//! Rows are emitted in row-major order with s_d varying slowest and σ_p̃
//! fastest, so the CSV for a given spec is always the same.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::continuum::{p1_weak, pointer_moments, zaxis_success_probability};
use crate::curves::format_number;
use crate::error::{Error, Result};
use crate::field::MeasurementGeometry;
use crate::params::Params;

pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Long-measurement disturbance probability.
    P1Weak,
    /// Pointer-density variance.
    Variance,
    /// Pointer-density mean.
    Mean,
    /// Probability of the unreversed shift, z-axis environment.
    PPlus,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::P1Weak => "p1_weak",
            Quantity::Variance => "variance",
            Quantity::Mean => "mean",
            Quantity::PPlus => "p_plus",
        }
    }

    fn evaluate(self, point: &GridPoint) -> Result<f64> {
        let geometry = || MeasurementGeometry::new(point.gamma, point.eta, point.xi);
        match self {
            Quantity::P1Weak => p1_weak(point.s_d, &geometry()?),
            Quantity::Variance => {
                Ok(pointer_moments(point.s_d, &geometry()?, point.sigma_p)?.variance)
            }
            Quantity::Mean => Ok(pointer_moments(point.s_d, &geometry()?, point.sigma_p)?.mean),
            Quantity::PPlus => zaxis_success_probability(point.s_d),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        [
            Quantity::P1Weak,
            Quantity::Variance,
            Quantity::Mean,
            Quantity::PPlus,
        ]
        .into_iter()
        .find(|q| q.name() == s)
        .ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub s_d: f64,
    pub gamma: f64,
    pub eta: f64,
    pub xi: f64,
    pub sigma_p: f64,
}

/// Axis values; angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub quantity: Quantity,
    pub s_d: Vec<f64>,
    pub gamma: Vec<f64>,
    pub eta: Vec<f64>,
    pub xi: Vec<f64>,
    pub sigma_p: Vec<f64>,
}

pub const AXES: [&str; 5] = ["s_d", "gamma", "eta", "xi", "sigma_p"];

impl SweepSpec {
    /// Single-point defaults: s_d = 0.2, γ = π/2, η = 0, ξ = 0.1, σ_p̃ = 0.03.
    pub fn new(quantity: Quantity) -> Self {
        Self {
            quantity,
            s_d: vec![0.2],
            gamma: vec![std::f64::consts::FRAC_PI_2],
            eta: vec![0.0],
            xi: vec![0.1],
            sigma_p: vec![0.03],
        }
    }

    /// Reads `quantity` and any axes from a spec file. Angles may be given
    /// in radians (`gamma`, `eta`) or degrees (`gamma_deg`, `eta_deg`).
    pub fn from_params(p: &mut Params) -> Result<Self> {
        let (name, at) =
            p.take_str("quantity")
                .ok_or_else(|| crate::params::ConfigError::MissingKey {
                    key: "quantity".into(),
                })?;
        let quantity =
            name.parse::<Quantity>()
                .map_err(|_| crate::params::ConfigError::BadValue {
                    at,
                    key: "quantity".into(),
                    value: name.clone(),
                    expected: "one of p1_weak, variance, mean, p_plus",
                })?;
        let mut spec = Self::new(quantity);
        if let Some(v) = p.take_list("s_d")? {
            spec.s_d = v;
        }
        if let Some(v) = angle_axis(p, "gamma", "gamma_deg")? {
            spec.gamma = v;
        }
        if let Some(v) = angle_axis(p, "eta", "eta_deg")? {
            spec.eta = v;
        }
        if let Some(v) = p.take_list("xi")? {
            spec.xi = v;
        }
        if let Some(v) = p.take_list("sigma_p")? {
            spec.sigma_p = v;
        }
        p.finish()?;
        Ok(spec)
    }

    fn axes(&self) -> [&[f64]; 5] {
        [&self.s_d, &self.gamma, &self.eta, &self.xi, &self.sigma_p]
    }

    /// Number of grid points, checked against [`MAX_GRID_POINTS`].
    pub fn size(&self) -> Result<usize> {
        let lens = self.axes().map(<[f64]>::len);
        if lens.contains(&0) {
            return Err(Error::EmptyGrid);
        }
        lens.iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&n| n <= MAX_GRID_POINTS)
            .ok_or(Error::GridTooLarge {
                points: lens.iter().fold(1usize, |a, &n| a.saturating_mul(n)),
                limit: MAX_GRID_POINTS,
            })
    }

    pub fn point(&self, mut index: usize) -> GridPoint {
        let mut coords = [0.0; 5];
        for (k, axis) in self.axes().iter().enumerate().rev() {
            coords[k] = axis[index % axis.len()];
            index /= axis.len();
        }
        let [s_d, gamma, eta, xi, sigma_p] = coords;
        GridPoint {
            s_d,
            gamma,
            eta,
            xi,
            sigma_p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub quantity: String,
    pub rows: Vec<(GridPoint, f64)>,
}

fn angle_axis(p: &mut Params, rad: &str, deg: &str) -> Result<Option<Vec<f64>>> {
    match (p.take_list(rad)?, p.take_list(deg)?) {
        (Some(_), Some(_)) => Err(p
            .out_of_range(deg, format!("give either {rad} or {deg}, not both"))
            .into()),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(v)) => Ok(Some(v.into_iter().map(f64::to_radians).collect())),
        (None, None) => Ok(None),
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    let n = spec.size()?;
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let point = spec.point(i);
            spec.quantity.evaluate(&point).map(|v| (point, v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        quantity: spec.quantity.name().to_string(),
        rows,
    })
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = AXES.to_vec();
        header.push(&self.quantity);
        w.write_record(&header)?;
        for (p, v) in &self.rows {
            w.write_record([p.s_d, p.gamma, p.eta, p.xi, p.sigma_p, *v].map(format_number))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.len() != 6 || header.iter().take(5).ne(AXES) {
            return Err(Error::invalid("csv", "unexpected sweep header"));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let v: Vec<f64> = rec
                .iter()
                .map(|f| {
                    f.parse()
                        .map_err(|_| Error::invalid("csv", format!("`{f}` is not a number")))
                })
                .collect::<Result<_>>()?;
            if v.len() != 6 {
                return Err(Error::invalid("csv", "short row"));
            }
            rows.push((
                GridPoint {
                    s_d: v[0],
                    gamma: v[1],
                    eta: v[2],
                    xi: v[3],
                    sigma_p: v[4],
                },
                v[5],
            ));
        }
        Ok(Self {
            quantity: header[5].to_string(),
            rows,
        })
    }
}

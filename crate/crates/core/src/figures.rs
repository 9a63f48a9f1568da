//! Curve data for the four standard figures.
//!
//! | id   | content                                                          |
//! |------|------------------------------------------------------------------|
//! | fig1 | P₁ against s_d on [0, 3], plus an inset on [0, 0.35]             |
//! | fig2 | initial pointer density and the same packet shifted by 0.1       |
//! | fig3 | broadened pointer densities (x-axis environment) for several s_d |
//! | fig4 | bimodal pointer densities (z-axis environment) for several s_d   |
//!
//! Defaults can be changed with `key=value` overrides; unknown keys are
//! rejected by name.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use crate::continuum::{
    p1_weak, pointer_density, pointer_moments, zaxis_pointer_density, PointerDensityMethod,
};
use crate::curves::CurveSet;
use crate::error::{Error, Result};
use crate::field::MeasurementGeometry;
use crate::params::Params;
use crate::pointer::{linspace, normal_pdf};

/// Points per curve.
pub const DEFAULT_POINTS: usize = 400;
/// Half-width of pointer-density grids in units of the widest packet.
pub const GRID_WIDTHS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl FigureId {
    pub const ALL: [FigureId; 4] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

/// One output file: its stem (`fig1`, `fig1_inset`, ...), plot title and data.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub stem: String,
    pub title: String,
    pub curves: CurveSet,
}

fn points(p: &mut Params) -> Result<usize> {
    let n = p.take_u64("points")?.unwrap_or(DEFAULT_POINTS as u64);
    if !(2..=1_000_000).contains(&n) {
        return Err(p
            .out_of_range("points", format!("{n} not in [2, 1000000]"))
            .into());
    }
    Ok(n as usize)
}

fn positive(p: &mut Params, key: &str, default: f64) -> Result<f64> {
    let v = p.take_f64(key)?.unwrap_or(default);
    if !(v > 0.0) {
        return Err(p.out_of_range(key, format!("{v} must be > 0")).into());
    }
    Ok(v)
}

fn non_negative(p: &mut Params, key: &str, default: f64) -> Result<f64> {
    let v = p.take_f64(key)?.unwrap_or(default);
    if !(v >= 0.0) {
        return Err(p.out_of_range(key, format!("{v} must be >= 0")).into());
    }
    Ok(v)
}

fn angle_deg(p: &mut Params, key: &str, default_rad: f64, max_deg: f64) -> Result<f64> {
    match p.take_f64(key)? {
        None => Ok(default_rad),
        Some(v) if (0.0..=max_deg).contains(&v) => Ok(v.to_radians()),
        Some(v) => Err(p
            .out_of_range(key, format!("{v} not in [0, {max_deg}]"))
            .into()),
    }
}

fn sd_list(p: &mut Params, default: &[f64]) -> Result<Vec<f64>> {
    let list = p.take_list("s_d")?.unwrap_or_else(|| default.to_vec());
    if list.is_empty() || list.iter().any(|v| !(*v >= 0.0)) {
        return Err(p
            .out_of_range("s_d", "needs one or more values >= 0")
            .into());
    }
    Ok(list)
}

fn sd_label(s_d: f64) -> String {
    format!("s_d={}", crate::curves::format_number(s_d))
}

/// Builds the curves of figure `id`. `overrides` is consumed; keys it holds
/// that the figure does not use are reported as errors.
pub fn build(id: FigureId, overrides: &mut Params) -> Result<Vec<Figure>> {
    let figures = match id {
        FigureId::Fig1 => fig1(overrides)?,
        FigureId::Fig2 => fig2(overrides)?,
        FigureId::Fig3 => fig3(overrides)?,
        FigureId::Fig4 => fig4(overrides)?,
    };
    overrides.finish()?;
    Ok(figures)
}

/// [`build`] with no overrides.
pub fn build_default(id: FigureId) -> Result<Vec<Figure>> {
    build(id, &mut Params::default())
}

fn fig1(p: &mut Params) -> Result<Vec<Figure>> {
    let xi = non_negative(p, "xi", 0.1)?;
    let gamma = angle_deg(p, "gamma_deg", FRAC_PI_2, 180.0)?;
    let eta = angle_deg(p, "eta_deg", 0.0, 360.0)?;
    let sd_max = positive(p, "sd_max", 3.0)?;
    let inset_max = positive(p, "inset_max", 0.35)?;
    let n = points(p)?;
    let geometry = MeasurementGeometry::new(gamma, eta, xi)?;
    let curve = |hi: f64| -> Result<CurveSet> {
        let x = linspace(0.0, hi, n);
        let y = x
            .iter()
            .map(|&s| p1_weak(s, &geometry))
            .collect::<Result<Vec<_>>>()?;
        let mut c = CurveSet::new("s_d", "P1", x);
        c.push("P1", y);
        Ok(c)
    };
    Ok(vec![
        Figure {
            stem: "fig1".into(),
            title: "Disturbance probability".into(),
            curves: curve(sd_max)?,
        },
        Figure {
            stem: "fig1_inset".into(),
            title: "Disturbance probability, weak decoherence".into(),
            curves: curve(inset_max)?,
        },
    ])
}

fn fig2(p: &mut Params) -> Result<Vec<Figure>> {
    let sigma = positive(p, "sigma_p", 0.03)?;
    let shift = p.take_f64("shift")?.unwrap_or(0.1);
    let n = points(p)?;
    let (lo, hi) = (
        shift.min(0.0) - GRID_WIDTHS * sigma,
        shift.max(0.0) + GRID_WIDTHS * sigma,
    );
    let x = linspace(lo, hi, n);
    let mut c = CurveSet::new("p", "density", x.clone());
    c.push(
        "initial",
        x.iter().map(|&v| normal_pdf(v, 0.0, sigma)).collect(),
    );
    c.push(
        "shifted",
        x.iter().map(|&v| normal_pdf(v, shift, sigma)).collect(),
    );
    Ok(vec![Figure {
        stem: "fig2".into(),
        title: "Pointer density before and after".into(),
        curves: c,
    }])
}

fn fig3(p: &mut Params) -> Result<Vec<Figure>> {
    let gamma = angle_deg(p, "gamma_deg", FRAC_PI_4, 180.0)?;
    let eta = angle_deg(p, "eta_deg", 0.0, 360.0)?;
    let xi = non_negative(p, "xi", 0.1)?;
    let sigma = positive(p, "sigma_p", 0.03)?;
    let sds = sd_list(p, &[0.05, 0.1, 0.2])?;
    let n = points(p)?;
    let geometry = MeasurementGeometry::new(gamma, eta, xi)?;
    let widest = sds
        .iter()
        .map(|&s| pointer_moments(s, &geometry, sigma).map(|m| m.variance.sqrt()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(sigma, f64::max);
    let mean = gamma.cos();
    let x = linspace(mean - GRID_WIDTHS * widest, mean + GRID_WIDTHS * widest, n);
    let mut c = CurveSet::new("p", "density", x.clone());
    c.push(
        "initial",
        x.iter().map(|&v| normal_pdf(v, mean, sigma)).collect(),
    );
    for &s in &sds {
        let d = pointer_density(s, &geometry, sigma, &x, PointerDensityMethod::Quadrature)?;
        c.push(sd_label(s), d.density);
    }
    Ok(vec![Figure {
        stem: "fig3".into(),
        title: "Pointer broadening, x-axis environment".into(),
        curves: c,
    }])
}

fn fig4(p: &mut Params) -> Result<Vec<Figure>> {
    let gamma = angle_deg(p, "gamma_deg", FRAC_PI_4, 180.0)?;
    let sigma = positive(p, "sigma_p", 0.03)?;
    let sds = sd_list(p, &[0.5, 1.0, 2.0])?;
    let n = points(p)?;
    let reach = gamma.cos().abs() + GRID_WIDTHS * sigma;
    let x = linspace(-reach, reach, n);
    let mut c = CurveSet::new("p", "density", x.clone());
    for &s in &sds {
        c.push(
            sd_label(s),
            zaxis_pointer_density(s, gamma, sigma, &x)?.density,
        );
    }
    Ok(vec![Figure {
        stem: "fig4".into(),
        title: "Pointer density, z-axis environment".into(),
        curves: c,
    }])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn interpolate(c: &CurveSet, label: &str, x: f64) -> f64 {
        let y = c.series(label).unwrap();
        let i = c.x.iter().position(|&v| v >= x).unwrap();
        if c.x[i] == x {
            return y[i];
        }
        let t = (x - c.x[i - 1]) / (c.x[i] - c.x[i - 1]);
        y[i - 1] + t * (y[i] - y[i - 1])
    }

    #[test]
    fn ids_parse() {
        assert_eq!("fig3".parse::<FigureId>().unwrap(), FigureId::Fig3);
        assert!(matches!(
            "fig9".parse::<FigureId>(),
            Err(Error::UnknownFigure(_))
        ));
    }

    #[test]
    fn fig1_passes_through_reference_point() {
        let figs = build_default(FigureId::Fig1).unwrap();
        assert_eq!(figs.len(), 2);
        let main = &figs[0].curves;
        assert_eq!(main.x.len(), DEFAULT_POINTS);
        assert_abs_diff_eq!(interpolate(main, "P1", 1.0), 0.17, epsilon = 0.01);
        assert_eq!(figs[1].curves.x[DEFAULT_POINTS - 1], 0.35);
    }

    #[test]
    fn fig2_unit_area_and_separation() {
        let c = &build_default(FigureId::Fig2).unwrap()[0].curves;
        let h = c.x[1] - c.x[0];
        for label in ["initial", "shifted"] {
            let y = c.series(label).unwrap();
            let area: f64 = h * (y.iter().sum::<f64>() - 0.5 * (y[0] + y[y.len() - 1]));
            assert_abs_diff_eq!(area, 1.0, epsilon = 1e-4);
        }
        let peak = |label: &str| {
            let y = c.series(label).unwrap();
            let i = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap();
            c.x[i]
        };
        assert_abs_diff_eq!(peak("shifted") - peak("initial"), 0.1, epsilon = 2.0 * h);
    }

    #[test]
    fn fig4_bimodal_at_large_sd() {
        let c = &build_default(FigureId::Fig4).unwrap()[0].curves;
        let y = c.series("s_d=2").unwrap();
        let centre = y[y.len() / 2];
        let target = FRAC_PI_4.cos();
        assert!(interpolate(c, "s_d=2", target) > 100.0 * centre.max(1e-300));
        assert!(interpolate(c, "s_d=2", -target) > 100.0 * centre.max(1e-300));
    }

    #[test]
    fn overrides_are_checked() {
        let mut p = Params::default();
        p.set_override("sigma_p=0.05").unwrap();
        let c = &build(FigureId::Fig2, &mut p).unwrap()[0].curves;
        assert_abs_diff_eq!(c.x[0], -0.25, epsilon = 1e-12);

        let mut p = Params::default();
        p.set_override("bogus=1").unwrap();
        let err = build(FigureId::Fig1, &mut p).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");

        let mut p = Params::default();
        p.set_override("sigma_p=-1").unwrap();
        assert!(build(FigureId::Fig3, &mut p).is_err());
    }

    #[test]
    fn outputs_are_reproducible() {
        for id in [FigureId::Fig2, FigureId::Fig4] {
            let a = build_default(id).unwrap();
            let b = build_default(id).unwrap();
            assert_eq!(
                a[0].curves.to_csv_string().unwrap(),
                b[0].curves.to_csv_string().unwrap()
            );
        }
    }
}

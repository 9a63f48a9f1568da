use std::fmt;
use std::path::Path;

use protectosim::continuum::pointer_moments;
use protectosim::ensemble::{run_ensemble, EnsembleConfig};
use protectosim::figures::{self, FigureId};
use protectosim::params::Params;
use protectosim::planner::{plan as make_plan, ApparatusParams, PlanReport};
use protectosim::sweep::{run_sweep, SweepSpec};
use protectosim::validate::{cross_engine, CrossEngineConfig};
use protectosim::{Error, MeasurementGeometry};

use crate::output::write_atomic;
use crate::Format;

/// z-score limit for ensemble agreement.
const Z_LIMIT: f64 = 3.0;

pub enum Outcome {
    Pass,
    Fail,
}

pub struct CliError(Error);

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError(e)
    }
}

impl From<protectosim::params::ConfigError> for CliError {
    fn from(e: protectosim::params::ConfigError) -> Self {
        CliError(e.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self.0 {
            Error::Config(_)
            | Error::InvalidParameter { .. }
            | Error::UnknownFigure(_)
            | Error::CapExceeded { .. }
            | Error::GridTooLarge { .. }
            | Error::EmptyGrid => 2,
            _ => 1,
        }
    }
}

type CliResult = Result<Outcome, CliError>;

pub fn figure(id: &str, out: &Path, format: Format, overrides: &[String]) -> CliResult {
    let id: FigureId = id.parse()?;
    let mut params = Params::default();
    for o in overrides {
        params.set_override(o)?;
    }
    for fig in figures::build(id, &mut params)? {
        if matches!(format, Format::Csv | Format::Both) {
            let path = write_atomic(
                out,
                &format!("{}.csv", fig.stem),
                fig.curves.to_csv_string()?.as_bytes(),
            )?;
            println!("wrote {}", path.display());
        }
        if matches!(format, Format::Svg | Format::Both) {
            let path = write_atomic(
                out,
                &format!("{}.svg", fig.stem),
                fig.curves.to_svg(&fig.title)?.as_bytes(),
            )?;
            println!("wrote {}", path.display());
        }
    }
    Ok(Outcome::Pass)
}

pub fn validate(n: usize, sd: Vec<f64>, seed: u64, draws: usize, out: Option<&Path>) -> CliResult {
    let mut config = CrossEngineConfig::new(n, sd, seed);
    config.draws = draws;
    let rows = cross_engine(&config)?;
    println!(
        "{:>8} {:>12} {:>12} {:>12} {:>12}  status",
        "s_d", "exact", "exact_sd", "continuum", "abs_diff"
    );
    let mut csv = String::from("s_d,exact_mean,exact_sd,continuum,abs_diff\n");
    for r in &rows {
        println!(
            "{:>8} {:>12.6} {:>12.6} {:>12.6} {:>12.6}  {}",
            r.s_d,
            r.exact_mean,
            r.exact_sd,
            r.continuum,
            r.abs_diff,
            if r.passes() { "ok" } else { "FAIL" }
        );
        let f = protectosim::curves::format_number;
        csv.push_str(
            &[r.s_d, r.exact_mean, r.exact_sd, r.continuum, r.abs_diff]
                .map(f)
                .join(","),
        );
        csv.push('\n');
    }
    if let Some(dir) = out {
        let path = write_atomic(dir, "validate.csv", csv.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(if rows.iter().all(|r| r.passes()) {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn ensemble_config(p: &mut Params) -> Result<EnsembleConfig, CliError> {
    let runs = p.take_u64("runs")?.unwrap_or(100_000);
    let seed = p.take_u64("seed")?.unwrap_or(0);
    let s_d = p.take_f64("s_d")?.unwrap_or(0.2);
    let gamma_deg = p.take_f64("gamma_deg")?.unwrap_or(45.0);
    let eta_deg = p.take_f64("eta_deg")?.unwrap_or(0.0);
    let xi = p.take_f64("xi")?.unwrap_or(0.1);
    let sigma_p = p.take_f64("sigma_p")?.unwrap_or(0.03);
    let bins = p.take_u64("bins")?.unwrap_or(100);
    let range = (p.take_f64("range_lo")?, p.take_f64("range_hi")?);
    let checks = [
        ("runs", runs >= 1, "must be >= 1"),
        (
            "bins",
            (2..=10_000_000).contains(&bins),
            "must be in [2, 10000000]",
        ),
        ("s_d", s_d >= 0.0, "must be >= 0"),
        ("sigma_p", sigma_p > 0.0, "must be > 0"),
        (
            "gamma_deg",
            (0.0..=180.0).contains(&gamma_deg),
            "must be in [0, 180]",
        ),
        ("xi", xi >= 0.0, "must be >= 0"),
    ];
    for (key, ok, reason) in checks {
        if !ok {
            return Err(p.out_of_range(key, reason).into());
        }
    }
    p.finish()?;
    let geometry = MeasurementGeometry::new(gamma_deg.to_radians(), eta_deg.to_radians(), xi)?;
    let mut config =
        EnsembleConfig::with_auto_range(runs, seed, s_d, geometry, sigma_p, bins as usize)?;
    match range {
        (None, None) => {}
        (Some(lo), Some(hi)) => {
            config.range = (lo, hi);
            if config.validate().is_err() {
                let m = pointer_moments(s_d, &geometry, sigma_p)?.mean;
                let half = 5.0 * sigma_p.max(s_d);
                return Err(p
                    .out_of_range("range_lo", format!("range must cover {m} +/- {half}"))
                    .into());
            }
        }
        (Some(_), None) => return Err(p.out_of_range("range_lo", "needs range_hi as well").into()),
        (None, Some(_)) => return Err(p.out_of_range("range_hi", "needs range_lo as well").into()),
    }
    Ok(config)
}

pub fn ensemble(path: &Path, out: &Path) -> CliResult {
    let mut params = Params::from_path(path)?;
    let config = ensemble_config(&mut params)?;
    let report = run_ensemble(&config)?;
    let mut csv = Vec::new();
    report.histogram.write_csv(&mut csv)?;
    let hist = write_atomic(out, "ensemble_histogram.csv", &csv)?;
    let summary = write_atomic(out, "ensemble_summary.txt", report.summary().as_bytes())?;
    print!("{}", report.summary());
    println!("wrote {}\nwrote {}", hist.display(), summary.display());
    match report.agrees_within(Z_LIMIT) {
        None => {
            println!("notice: fewer than two runs; agreement checks skipped");
            Ok(Outcome::Pass)
        }
        Some(true) => {
            println!("agreement: mean and variance within {Z_LIMIT} standard errors");
            Ok(Outcome::Pass)
        }
        Some(false) => {
            println!("agreement: FAILED (|z| > {Z_LIMIT})");
            Ok(Outcome::Fail)
        }
    }
}

pub fn plan(path: &Path, out: &Path) -> CliResult {
    let mut params = Params::from_path(path)?;
    let (apparatus, s_d) = ApparatusParams::from_params(&mut params)?;
    let report = make_plan(&apparatus, s_d)?;
    print!("{report}");
    let mut csv = PlanReport::CSV_HEADER.join(",");
    csv.push('\n');
    csv.push_str(&report.csv_row().join(","));
    csv.push('\n');
    let path = write_atomic(out, "plan.csv", csv.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(Outcome::Pass)
}

pub fn sweep(path: &Path, out: &Path) -> CliResult {
    let mut params = Params::from_path(path)?;
    let spec = SweepSpec::from_params(&mut params)?;
    let table = run_sweep(&spec)?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    let path = write_atomic(out, &format!("sweep_{}.csv", table.quantity), &csv)?;
    println!("{} points\nwrote {}", table.rows.len(), path.display());
    Ok(Outcome::Pass)
}

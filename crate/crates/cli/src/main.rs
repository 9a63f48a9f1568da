//! `protectosim` command-line front end.
//!
//! Exit status: 0 on success with all checks passing, 1 when a check fails
//! (or a computation fails), 2 on usage and configuration errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "protectosim",
    version,
    about = "Protective measurement with a spin environment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Write the curve data of a figure (fig1, fig2, fig3, fig4).
    Figure {
        id: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Override a figure parameter, e.g. `--set sigma_p=0.05`.
        #[arg(long = "set", value_name = "KEY=VAL")]
        overrides: Vec<String>,
    },
    /// Compare the exact N-spin engine with the continuum model.
    Validate {
        #[arg(long)]
        n: usize,
        /// Comma-separated s_d values.
        #[arg(long, value_delimiter = ',', required = true)]
        sd: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Coupling draws per s_d.
        #[arg(long, default_value_t = protectosim::validate::DEFAULT_DRAWS)]
        draws: usize,
        /// Also write the table as CSV to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo ensemble from a key=value config file.
    Ensemble {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Plan a Stern–Gerlach experiment from a key=value parameter file.
    Plan {
        params: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Evaluate a scalar quantity over a parameter grid.
    Sweep {
        spec: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Figure {
            id,
            out,
            format,
            overrides,
        } => commands::figure(&id, &out, format, &overrides),
        Command::Validate {
            n,
            sd,
            seed,
            draws,
            out,
        } => commands::validate(n, sd, seed, draws, out.as_deref()),
        Command::Ensemble { config, out } => commands::ensemble(&config, &out),
        Command::Plan { params, out } => commands::plan(&params, &out),
        Command::Sweep { spec, out } => commands::sweep(&spec, &out),
    };
    match result {
        Ok(commands::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Fail) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

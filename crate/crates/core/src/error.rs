use std::fmt;

use thiserror::Error;

use crate::params::ConfigError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The net field on the qubit vanishes, so its direction is undefined.
    #[error("net field vanishes (chi = {chi:e}); direction undefined")]
    DegenerateField { chi: f64 },

    #[error("environment of {n} spins exceeds the cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("spectral density width is zero; use the delta-function limit")]
    ZeroWidth,

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("first-order z-axis expansion is singular at b = -1")]
    SingularPoint,

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: usize, limit: usize },

    #[error("unknown figure `{0}` (expected fig1, fig2, fig3 or fig4)")]
    UnknownFigure(String),

    #[error("grid is empty")]
    EmptyGrid,

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Non-fatal notice that inputs left the regime in which the approximations
/// were validated. Computation proceeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeWarning {
    /// ξ ≥ 1: the measurement field is not weak compared to the protection field.
    StrongMeasurement { xi: f64 },
    /// Pointer linearization used outside s_d ≲ 0.35, ξ ≲ 0.1.
    OutsideWeakDecoherence { s_d: f64, xi: f64 },
    /// ω₀T ≤ 10: the measurement is too short to be protective.
    ShortMeasurement { omega0_t: f64 },
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RegimeWarning::StrongMeasurement { xi } => {
                write!(f, "xi = {xi} >= 1 is outside the weak-measurement regime")
            }
            RegimeWarning::OutsideWeakDecoherence { s_d, xi } => write!(
                f,
                "s_d = {s_d}, xi = {xi} outside the weak regime (s_d <= 0.35, xi <= 0.1); \
                 linearized pointer shift may be inaccurate"
            ),
            RegimeWarning::ShortMeasurement { omega0_t } => write!(
                f,
                "omega0*T = {omega0_t} <= 10 breaks the long-measurement premise"
            ),
        }
    }
}

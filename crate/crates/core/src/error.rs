use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("equilibrium solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("degenerate geometry: ions {0} and {1} coincide")]
    DegenerateGeometry(usize, usize),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("drive frequency {drive} is within the guard band of mode {mode} ({axis} axis, frequency {mode_frequency})")]
    GuardedResonance {
        axis: char,
        mode: usize,
        drive: f64,
        mode_frequency: f64,
    },

    #[error("coupling set is for the {found} axis, expected {expected}")]
    AxisMismatch { expected: char, found: char },

    #[error("basis does not match: {0}")]
    BasisMismatch(String),

    #[error("unknown configuration label: {0}")]
    UnknownLabel(String),

    #[error("wrong crystal shape: {0}")]
    CrystalShape(String),

    #[error("no sign change of {condition} in [{lo}, {hi}]")]
    NoSignChange {
        condition: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("phonon cutoff too small: top Fock level population {population:e} exceeds {threshold:e}")]
    CutoffTooSmall { population: f64, threshold: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short stable identifier used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::SolverFailure { .. } => "solver-failure",
            Error::DegenerateGeometry(..) => "degenerate-geometry",
            Error::NotSymmetric(_) => "not-symmetric",
            Error::GuardedResonance { .. } => "guarded-resonance",
            Error::AxisMismatch { .. } => "axis-mismatch",
            Error::BasisMismatch(_) => "basis-mismatch",
            Error::UnknownLabel(_) => "unknown-label",
            Error::CrystalShape(_) => "crystal-shape",
            Error::NoSignChange { .. } => "no-sign-change",
            Error::CutoffTooSmall { .. } => "cutoff-too-small",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }

    /// Process exit code: 2 input/config, 3 guarded resonance, 4 numerical, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::GuardedResonance { .. } => 3,
            Error::SolverFailure { .. }
            | Error::DegenerateGeometry(..)
            | Error::NotSymmetric(_)
            | Error::NoSignChange { .. }
            | Error::CutoffTooSmall { .. } => 4,
            Error::Io(_) | Error::Csv(_) => 1,
            Error::InvalidParameter { .. }
            | Error::AxisMismatch { .. }
            | Error::BasisMismatch(_)
            | Error::UnknownLabel(_)
            | Error::CrystalShape(_)
            | Error::Config(_) => 2,
        }
    }
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    #[error("variant {variant} is inconsistent with speed of light {c}")]
    VariantMismatch { variant: String, c: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("operation requires a finite speed of light")]
    RequiresFiniteC,

    #[error(
        "momentum truncation too small: Pmax = {pmax} leaves tail ratio {ratio:e} (need < 1e-14)"
    )]
    Truncation { pmax: f64, ratio: f64 },

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("negative density {value:e} at cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("degenerate state: {below} of {total} cells are below the density floor")]
    DegenerateState { below: usize, total: usize },

    #[error("finite-difference stencil left the evaluable region")]
    OutsideDomain,

    #[error("no convergence to stationarity: L1 distance {l1:e} at t = {t}")]
    NonConvergence { l1: f64, t: f64 },

    #[error("flux saturation violated at face {face}: |F| = {flux:e} > c * rho_avg = {bound:e}")]
    Saturation { face: usize, flux: f64, bound: f64 },

    #[error("{}", config_message(*.line, .key, .message))]
    Config { line: Option<usize>, key: String, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn config_message(line: Option<usize>, key: &str, message: &str) -> String {
    match (line, key.is_empty()) {
        (Some(l), false) => format!("config line {l}: `{key}`: {message}"),
        (Some(l), true) => format!("config line {l}: {message}"),
        (None, false) => format!("config: `{key}`: {message}"),
        (None, true) => format!("config: {message}"),
    }
}

impl Error {
    pub(crate) fn config(line: Option<usize>, key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { line, key: key.into(), message: message.into() }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io { path: path.display().to_string(), message: err.to_string() }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Process exit status for this error: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::VariantMismatch { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

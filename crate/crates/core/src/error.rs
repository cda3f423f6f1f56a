use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bisection failed to bracket a root on {axis:?} line {line} near index {index}")]
    NonConvergedRoot {
        axis: crate::geometry::Axis,
        line: usize,
        index: usize,
    },

    #[error("level-set gradient vanishes at ({0}, {1})")]
    DegenerateGradient(f64, f64),

    #[error("extrapolation system is singular: {0}")]
    SingularVandermonde(String),

    #[error("interval has {found} points, the wide-interval path needs at least {needed}")]
    InsufficientPoints { found: usize, needed: usize },

    #[error("half-ellipse stencil at ({x}, {y}) has {found} points, {needed} needed")]
    InsufficientStencilPoints {
        x: f64,
        y: f64,
        found: usize,
        needed: usize,
    },

    #[error("least-squares basis is rank deficient (rank {rank} of {cols})")]
    RankDeficient { rank: usize, cols: usize },

    #[error("boundary closure data incomplete: {0}")]
    InsufficientBoundaryData(String),

    #[error("value {0} is not strictly positive")]
    NonPositiveValue(f64),

    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { found: usize, needed: usize },

    #[error("time step blew up at t = {t}: max |u| = {max}")]
    UnstableStep { t: f64, max: f64 },

    #[error("flip-flop guard violated: eps_r = {eps_r} < 2^{order} * eps_c = {bound}")]
    FlipFlopGuard {
        eps_r: f64,
        order: usize,
        bound: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error("field mask does not match the grid ({0})")]
    MaskMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input (settings or files) rather than
    /// by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::FlipFlopGuard { .. }
                | Error::Json(_)
                | Error::Csv(_)
                | Error::Io { .. }
                | Error::Format(_)
                | Error::MaskMismatch(_)
        )
    }
}

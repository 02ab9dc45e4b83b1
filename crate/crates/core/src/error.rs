use thiserror::Error;

/// Errors raised across the library.
///
/// Variants map onto the CLI exit codes: configuration and parse problems
/// exit with 2, stage failures with 3 and artifact integrity problems with 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line} (key `{key}`): {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },

    #[error("argument error: {0}")]
    Argument(String),

    #[error("domain error: sample point x={point:?}, t={time} cannot be interpolated from the source grid")]
    Domain { point: [f64; 3], time: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("splitting failed: best Besov norm {achieved:.6e} did not reach eps = {target:.6e}")]
    SplitFailure { achieved: f64, target: f64 },

    #[error("no admissible cutoff radius: best ||W|| = {best:.6e} > alpha = {alpha:.6e} (box too small)")]
    CutoffFailure { best: f64, alpha: f64 },

    #[error("Picard iteration diverged at step {step}: increment {increment:.6e} exceeds twice the initial {initial:.6e}")]
    Diverged {
        step: usize,
        increment: f64,
        initial: f64,
    },

    #[error("blow-up: non-finite coefficients at step {step} (s = {s})")]
    BlowUp { step: usize, s: f64 },

    #[error("fixed point not found after {iterations} iterations: residual {residual:.6e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ball invariance failed for rho = {rho:.6e}; suggested rho = {suggested:.6e}")]
    BallInvariance { rho: f64, suggested: f64 },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("integrity error in {file}: {message}")]
    Integrity { file: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Argument(_) => 2,
            Error::Integrity { .. } => 4,
            Error::Stage { source, .. } => match source.exit_code() {
                2 => 2,
                4 => 4,
                _ => 3,
            },
            _ => 3,
        }
    }
}

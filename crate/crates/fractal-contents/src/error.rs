//! Error taxonomy shared by every module in the crate.
//!
//! The split mirrors how callers should react:
//! * [`Error::Domain`]: the request itself is outside the function's
//!   mathematical domain (wrong index, nonpositive scale, q >= d, ...).
//!   Fix the arguments.
//! * [`Error::Resolution`]: a grid computation was asked for below the
//!   resolution it can honestly answer at (t < 2h, memory cap, ...).
//!   Coarsen the request or refine the grid.
//! * [`Error::Generation`]: a prefractal event list could not be built
//!   (level 0, thresholds underflowing doubles, ...).
//! * [`Error::Divergence`]: an infinite series or integral was evaluated
//!   at or beyond its abscissa of convergence.
//! * [`Error::InternalConsistency`]: two independent routes to the same
//!   quantity disagreed beyond their stated tolerance. This is a bug
//!   indicator, never a user error, and is therefore loud and fatal.
//! * [`Error::Io`] / [`Error::Format`]: (de)serialization plumbing.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Grid or sampling resolution is insufficient for the request.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A prefractal event list could not be generated.
    #[error("generation error: {0}")]
    Generation(String),

    /// Series/integral evaluated at or beyond its abscissa of convergence.
    #[error("divergence error: {0}")]
    Divergence(String),

    /// Two independent computations of the same quantity disagreed.
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),

    /// Underlying I/O failure while reading or writing grids/reports.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input document (model JSON, grid sidecar, PGM header, ...).
    #[error("format error: {0}")]
    Format(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    ///
    /// Identity/consistency failures exit 1, bad inputs exit 2; this is the
    /// contract scripts rely on, so keep it stable.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InternalConsistency(_) => 1,
            _ => 2,
        }
    }
}

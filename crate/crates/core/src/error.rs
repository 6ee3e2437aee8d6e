use crate::grid::Point;
use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A precondition on user-supplied parameters failed.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Two fields that must live on the same grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A ball contained no grid point, so averages over it are undefined.
    #[error("degenerate ball: no grid point inside B(({}, {}), {radius})", center[0], center[1])]
    DegenerateBall { center: Point, radius: f64 },

    /// A computation produced or consumed a non-finite value.
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("momentum k={k} outside the grid [-{half}, {max}] for N={n_sites}", half = n_sites / 2, max = n_sites / 2 - 1)]
    MomentumOutOfRange { k: i64, n_sites: usize },

    #[error("eigenvalue iteration did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },

    /// A result violated an invariant that holds for every valid input.
    /// This points at a numerical or convention problem, not at the caller.
    #[error("consistency failure: {0}")]
    Consistency(String),

    #[error("pair block k={k} is degenerate (omega = 0) at field {field}")]
    DegenerateBlock { k: i64, field: f64 },

    #[error("invalid grid for `{axis}`: {reason}")]
    InvalidGrid { axis: &'static str, reason: String },

    #[error("need at least {need} points along the axis, got {got}")]
    TooFewPoints { got: usize, need: usize },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

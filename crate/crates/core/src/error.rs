use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller broke a documented precondition (arity, base points, manifolds).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Antipodal points on the sphere, where log and transport are undefined.
    #[error("singular configuration: {0}")]
    Singularity(String),

    /// A curve whose discrete speed vanishes somewhere.
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid diffeomorphism: {0}")]
    InvalidDiffeo(String),

    /// A direct linear solve hit a vanishing pivot.
    #[error("numerical conditioning failure: {0}")]
    Conditioning(String),

    #[error("geodesic solver did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NotConverged { iterations: usize, gradient_norm: f64 },

    /// The matching gap grew by more than the allowed factor between iterations.
    #[error("matching diverged: gap history {gap_history:?}")]
    Divergence { gap_history: Vec<f64> },
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

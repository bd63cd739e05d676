use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point lies outside the closed domain it was required to be in.
    #[error("point {0:?} lies outside the closed cube")]
    OutsideDomain(Vec<f64>),
    #[error("kernel evaluated on its singularity")]
    Singular,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("quadrature did not converge: {what} (refinement delta {delta:e})")]
    NonConvergence { what: String, delta: f64 },
    #[error("bisection failed to bracket {0}")]
    Bracket(String),
    #[error("linear solve did not converge after {0} iterations")]
    LinearSolve(usize),
    #[error("non-finite value at step {step} (t = {t})")]
    BlowUp { step: usize, t: f64 },
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

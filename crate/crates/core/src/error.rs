use thiserror::Error;

/// Errors produced by the spectral solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite potential value at node {node} (x = {x})")]
    Discretization { node: usize, x: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("integration blew up; last valid x = {last_x}")]
    BlowUp { last_x: f64 },

    #[error("Jordan regime: |epsilon| = {epsilon:e} is too small for the diagonalizing transform; use the perturbation module")]
    JordanRegime { epsilon: f64 },

    #[error("superpotential has a pole: factorization seed has {nodes} node(s) for x0 = {x0}, l = {l}")]
    SuperpotentialPole { x0: f64, l: usize, nodes: usize },

    #[error("degenerate quadrature: denominator {value:e} is below threshold")]
    DegenerateQuadrature { value: f64 },

    #[error("solvability violated: growing-mode ratio {ratio:e} at x = {radius}")]
    SolvabilityViolation { ratio: f64, radius: f64 },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

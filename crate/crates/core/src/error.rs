use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension below 2 (n = {0})")]
    DimensionBelowTwo(i64),
    #[error("sigma out of range: {0} not in (0, 1)")]
    SigmaOutOfRange(f64),
    #[error("p must exceed 1 (p = {0})")]
    ExponentNotSuperlinear(f64),
    #[error("non-finite parameter `{0}`")]
    NonFinite(&'static str),

    /// An operation was called outside the parameter range where it is defined.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Gamma pole at {0}")]
    GammaPole(f64),

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("extrapolation did not converge; estimates {estimates:?}")]
    Extrapolation { estimates: Vec<f64> },

    #[error("Newton solver failed after {iterations} iterations; residual history {history:?}")]
    SolverDivergence { iterations: usize, history: Vec<f64> },

    #[error("singular linear system at pivot {0}")]
    SingularMatrix(usize),

    #[error("grid error: {0}")]
    Grid(String),
}

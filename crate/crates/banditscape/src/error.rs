use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("scale mismatch between mixture components ({0} vs {1}); rescale first")]
    ScaleMismatch(f64, f64),
    #[error("mixture weights must be nonnegative with positive sum")]
    BadMixtureWeights,
    #[error("pruning at threshold {0} removed all mass")]
    AllMassPruned(f64),
    #[error("vector is not in the probability simplex: {0}")]
    NotSimplex(String),
    #[error("conditioning on a zero-probability event")]
    ZeroProbabilityEvent,
    #[error("time parameter {0} outside [0, 1]")]
    TimeOutOfRange(f64),
    #[error("gradient undefined at t=1 (terminal kink)")]
    TerminalKink,
    #[error("adversary mix is not balanced (spread {0:.3e})")]
    NotBalanced(f64),
    #[error("signal has zero probability under the adversary mix")]
    DegenerateSignal,
    #[error("horizon {0} is not a perfect square; lattice refinement needs an integer sqrt(T)")]
    NotPerfectSquare(usize),
    #[error("dynamic programming node budget exceeded ({visited} > {cap}); partial depth {depth}")]
    NodeBudget { visited: usize, cap: usize, depth: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

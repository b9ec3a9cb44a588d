use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("non-stochastic {what}: entries sum to {sum} (index {index})")]
    NonStochastic {
        what: &'static str,
        index: usize,
        sum: f64,
    },

    #[error("negative probability {value} in {what} (index {index})")]
    NegativeProbability {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid node {node} in {what} (network has {d} nodes)")]
    InvalidNode {
        what: &'static str,
        node: usize,
        d: usize,
    },

    #[error("{what} out of range: {value} not in [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("event has zero probability")]
    ZeroProbability,

    #[error("enumeration cap exceeded: {needed} states > cap {cap}")]
    CapExceeded { needed: u128, cap: u128 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no convergence after {iterations} iterations (gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),
}

pub type Result<T> = std::result::Result<T, Error>;

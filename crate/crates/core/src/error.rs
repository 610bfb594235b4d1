use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("reaction term is not bistable: {0}")]
    NotBistable(String),
    #[error("root bracketing failed: {0}")]
    RootBracketingFailed(String),
    #[error("argument outside domain: {0}")]
    DomainError(String),
    #[error("reaction denominator vanishes on the invariant interval")]
    SingularDenominator,
    #[error("integral diverges: {0}")]
    DivergentIntegral(String),
    #[error("grid too coarse: need at least {need} nodes, got {got}")]
    GridTooCoarse { need: usize, got: usize },
    #[error("time step {dt} exceeds stability bound {bound}")]
    UnstableStep { dt: f64, bound: f64 },
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("recursion depth {k} exceeds cap {cap}")]
    RecursionDepthExceeded { k: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

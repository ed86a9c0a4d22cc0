use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spec is not the negative of a subordinator: {0}")]
    NotASubordinator(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("tilted measure is not a Levy measure: {0}")]
    TiltDiverges(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("empty tail above the cutoff")]
    EmptyTail,
    #[error("exponential functional may be infinite: {0}")]
    MayDiverge(String),
    #[error("conditioning event too rare: acceptance {acceptance:.3e} after {attempts} attempts")]
    RareEvent { acceptance: f64, attempts: u64 },
    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("argument outside the domain: {0}")]
    OutOfDomain(String),
    #[error("no Yaglom regime for this classification")]
    NoYaglomRegime,
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("not factorizable: {0}")]
    NotFactorizable(String),
    #[error("too few exceedances: {0} < 50")]
    TooFewExceedances(usize),
    #[error("empty sample")]
    Empty,
    #[error("series outside its validated range: {0}")]
    SeriesDivergence(String),
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

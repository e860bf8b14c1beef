use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mean undefined: Pareto tail {0} <= 1")]
    MeanUndefined(f64),

    #[error("projection failed to converge (max violation {violation:e} after {sweeps} sweeps)")]
    ProjectionFailed { violation: f64, sweeps: usize },

    #[error("rank-deficient design (lambda_min = {0:e})")]
    RankDeficient(f64),

    #[error("invalid response: {0}")]
    InvalidResponse(String),

    #[error("MAPE undefined on all-zero responses")]
    MapeUndefined,

    #[error("WAPE undefined on all-zero responses")]
    WapeUndefined,

    #[error("no feasible Pareto parameter")]
    NoFeasiblePareto,

    #[error("insufficient samples for k blocks (n = {n}, k = {k})")]
    InsufficientSamples { n: usize, k: usize },

    #[error("non-finite gradient at example {index}")]
    NonFiniteGradient { index: usize },

    #[error("β-statistic undefined: no positive mass")]
    NoPositiveMass,

    #[error("feasible design not achieved in {attempts} attempts for {spec}")]
    DesignInfeasible { attempts: usize, spec: String },

    #[error("{0}")]
    Parse(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

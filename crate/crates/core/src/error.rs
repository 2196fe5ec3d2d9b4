use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    Domain(&'static str),

    #[error("integration diverged at step {step}: |x| exceeded {bound}")]
    Divergence { step: usize, bound: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("master stability function has no stability threshold on the grid: {0}")]
    ThresholdNotFound(String),

    #[error("not a valid permutation symmetry: {0}")]
    InvalidSymmetry(String),

    #[error("block diagonalization failed: {0}")]
    Decomposition(String),

    #[error("eigenvalue condition violated: |lambda_s2| = {lambda_s2} >= lambda_min = {lambda_min}")]
    NoEpsilonRange { lambda_s2: f64, lambda_min: f64 },

    #[error("invalid cluster pattern: {0}")]
    InvalidPattern(String),

    #[error("bit value {0} has no symbol mapping")]
    UnmappedBit(u8),

    #[error("design requirements violated: {0}")]
    Requirement(String),

    #[error("window outside trace: {0}")]
    Window(String),

    #[error("seed {0} reused within one run")]
    SeedReuse(u64),

    #[error("noise level {0} is outside every scheduled range")]
    Unscheduled(f64),

    #[error("network file: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

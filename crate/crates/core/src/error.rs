use thiserror::Error;

pub type Result<T> = std::result::Result<T, PqecError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PqecError {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("{what} is limited to {max}, requested {requested}")]
    ResourceLimit {
        what: &'static str,
        max: usize,
        requested: usize,
    },

    #[error("degenerate SWAP outcome: branch probability {0:e}")]
    DegenerateOutcome(f64),

    #[error("observable is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("steady state undefined: discriminant {0} is negative")]
    UndefinedSteadyState(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("sweep cell (p = {p}, ell = {ell}): {source}")]
    Cell {
        p: f64,
        ell: u32,
        #[source]
        source: Box<PqecError>,
    },
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(PqecError::ProbabilityOutOfRange(p))
    }
}

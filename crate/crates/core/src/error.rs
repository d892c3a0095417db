use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an argument does not hold.
    InvalidArgument(String),
    /// Two inputs that must agree in shape do not.
    DimensionMismatch { expected: usize, found: usize },
    /// The eigensolver hit its iteration cap.
    NoConvergence { iterations: usize, residual: f64 },
    /// No subgraph was large enough to be clustered.
    NoAdmissibleSubgraph { m_star: usize },
    /// GALE could not link the local estimates together.
    StitchFailure(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NoConvergence { iterations, residual } => write!(
                f,
                "eigensolver did not converge in {iterations} iterations (best residual {residual:e})"
            ),
            Error::NoAdmissibleSubgraph { m_star } => {
                write!(f, "no sampled subgraph reached the minimum size m_star = {m_star}")
            }
            Error::StitchFailure(msg) => write!(f, "stitch failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

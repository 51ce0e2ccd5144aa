use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("packing has no inclusions")]
    EmptyPacking,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("inclusion {0} has a non-positive radius")]
    NonPositiveRadius(usize),
    #[error("domain radius must be positive")]
    NonPositiveDomain,
    #[error("inclusions {0} and {1} touch or overlap")]
    Overlap(usize, usize),
    #[error("inclusion {0} touches or crosses the outer boundary")]
    OutsideDomain(usize),
    #[error("boundary inclusions {0} and {1} have the same polar angle")]
    DegenerateAngle(usize, usize),
    #[error("identical-radius conductivities requested but radii differ ({0} vs {1})")]
    Mode(f64, f64),
    #[error("network is singular: {0}")]
    SingularSystem(String),
    #[error("interior inclusion {0} has no path to any boundary inclusion")]
    FloatingComponent(usize),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("least-squares system is ill conditioned (estimate {0:.3e})")]
    IllConditioned(f64),
    #[error("oracle refused: {0}")]
    OracleRefused(String),
    #[error("infeasible geometry: {0}")]
    Infeasible(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable name, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyPacking => "EmptyPackingError",
            Error::NonFinite(_) => "NonFiniteError",
            Error::NonPositiveRadius(_) => "NonPositiveRadiusError",
            Error::NonPositiveDomain => "NonPositiveDomainError",
            Error::Overlap(..) => "OverlapError",
            Error::OutsideDomain(_) => "OutsideDomainError",
            Error::DegenerateAngle(..) => "DegenerateAngleError",
            Error::Mode(..) => "ModeError",
            Error::SingularSystem(_) => "SingularSystemError",
            Error::FloatingComponent(_) => "FloatingComponentError",
            Error::Domain(_) => "DomainError",
            Error::IllConditioned(_) => "IllConditionedError",
            Error::OracleRefused(_) => "OracleRefusedError",
            Error::Infeasible(_) => "InfeasibleError",
            Error::Invalid(_) => "InvalidInputError",
            Error::Parse(_) => "ParseError",
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem(_) | Error::IllConditioned(_) | Error::FloatingComponent(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

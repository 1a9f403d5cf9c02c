use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("imaginary residue {residue:e} exceeds tolerance {tolerance:e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("no positive semidefinite embedding found up to m = {m_cap} (last min eigenvalue {min_eig:e})")]
    EmbeddingNotPositive { m_cap: usize, min_eig: f64 },

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("argument {0} outside (0, 1)")]
    Domain(f64),

    #[error("nonpositive element coefficient {value:e} on element {element}")]
    NonpositiveCoefficient { element: usize, value: f64 },

    #[error("solver breakdown: {0}")]
    SolverBreakdown(String),

    #[error("empty averaging region")]
    EmptyRegion,

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonFinite(_) => "non_finite",
            Error::ImaginaryResidue { .. } => "imaginary_residue",
            Error::EmbeddingNotPositive { .. } => "embedding_not_positive",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Domain(_) => "domain",
            Error::NonpositiveCoefficient { .. } => "nonpositive_coefficient",
            Error::SolverBreakdown(_) => "solver_breakdown",
            Error::EmptyRegion => "empty_region",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}

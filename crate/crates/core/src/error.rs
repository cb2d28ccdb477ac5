use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants split into input problems (bad files, bad arguments, sizes that
/// do not line up) and numerical failures (a projection that annihilates the
/// state, an ill-posed subspace). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("parse error at position {position}: {msg}")]
    ParseAt { position: usize, msg: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("matrix is not positive semidefinite (pivot {pivot:.3e})")]
    NotPsd { pivot: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("post-selection impossible: outcome probability {probability:.3e}")]
    PostSelectionImpossible { probability: f64 },

    #[error("operator annihilates the state (norm {norm:.3e})")]
    Annihilation { norm: f64 },

    #[error("invalid channel: {0}")]
    Channel(String),

    #[error("symmetry violation: {0}")]
    SymmetryViolation(String),

    #[error("degenerate basis: all {0} singular values below threshold")]
    DegenerateBasis(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("post-selection kept no shots")]
    EmptyEnsemble,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPsd { .. }
                | Error::PostSelectionImpossible { .. }
                | Error::Annihilation { .. }
                | Error::DegenerateBasis(_)
                | Error::Fit(_)
                | Error::EmptyEnsemble
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}

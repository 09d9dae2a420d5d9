use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unitary: max |U^dagger U - I| entry is {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("unsupported qubit count {0}: supported range is 1..=3")]
    QubitCount(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid gate library: {0}")]
    InvalidLibrary(String),

    #[error(
        "no Clifford+T sequence within distance {epsilon:.3e} at T-count <= {max_t_count}; \
         increase epsilon or the T budget"
    )]
    EmptyLibrary { epsilon: f64, max_t_count: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("library entry `{label}` has no evaluation at offset {offset}")]
    MissingOffset { label: String, offset: f64 },

    #[error("band [-{band}, {band}] contains no grid offsets")]
    EmptyBand { band: f64 },

    #[error("path did not reach an exact solution (best residual {best_residual:.3e})")]
    NotExact { best_residual: f64 },

    #[error("l1 norm {target} is not attained on the path (range [{min}, {max}])")]
    L1NotAttained { target: f64, min: f64, max: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

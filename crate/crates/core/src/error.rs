use thiserror::Error;

/// Errors across state construction, spectral analysis, measurement
/// channels and reconstruction.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("state norm deviates from 1: ‖ψ‖² = {norm_sq}")]
    Norm { norm_sq: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian: max |M − M†| = {max_dev:.3e}")]
    NotHermitian { max_dev: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eig:.3e}")]
    NotPositive { min_eig: f64 },

    #[error("trace deviates from 1: Tr = {trace}")]
    Trace { trace: f64 },

    #[error("matrix is not idempotent: max |P² − P| = {max_dev:.3e}")]
    NotIdempotent { max_dev: f64 },

    #[error("vectors are not orthonormal: max Gram deviation {max_dev:.3e}")]
    NotOrthonormal { max_dev: f64 },

    #[error(
        "eigenvalue grouping is ambiguous: gap {gap:.3e} lies strictly between \
         tol {tol:.3e} and 2·tol"
    )]
    GroupingAmbiguous { gap: f64, tol: f64 },

    #[error("duplicate eigenvalue {value}")]
    DuplicateEigenvalue { value: f64 },

    #[error("supplied basis does not span eigenspace {block}: deviation {max_dev:.3e}")]
    SpanMismatch { block: usize, max_dev: f64 },

    #[error(
        "selection on outcome {index} is impossible: probability {probability:.3e} \
         is below the selection threshold"
    )]
    ZeroProbabilityOutcome { index: usize, probability: f64 },

    #[error("observable has a degenerate eigenspace: outcome {index} has rank {rank}")]
    DegenerateSpectrum { index: usize, rank: usize },

    #[error("probe vector is not in eigenspace {block}: out-of-space component {residual:.3e}")]
    NotInEigenspace { block: usize, residual: f64 },

    #[error("exact oracle returned {value} outside [0, 1]")]
    OracleRange { value: f64 },

    #[error("no reconstruction report covers admissible block {block}")]
    BlockMissing { block: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

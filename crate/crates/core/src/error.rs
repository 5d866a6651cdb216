use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-normalizable profile: {0}")]
    NonNormalizable(String),

    #[error("grid rejected: {0}")]
    GridRejected(String),

    #[error("resolution cap exceeded: {0}")]
    ResolutionCap(String),

    #[error("jsa is not normalized")]
    NotNormalized,

    #[error("continuous-wave pump has no two-dimensional amplitude; use the CW engine")]
    CwPump,

    #[error("shift exceeds grid support: {0}")]
    ShiftExceedsSupport(String),

    #[error("non-physical overlap |kappa| = {0}")]
    NonPhysicalOverlap(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("no PSP-aligned basis exists: {0}")]
    NotMaximallyEntangled(String),

    #[error("analytic method requires Gaussian shapes")]
    AnalyticRequiresGaussian,

    #[error("sweep point {index} failed: {source}")]
    SweepPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors surfaced by the analytic and Monte Carlo layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{what} of size {requested} exceeds the cap of {cap}")]
    SizeLimitExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("permutation is not geodesic; the cycle-count formula does not apply")]
    NonGeodesic,

    #[error("matrix dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e} exceeds {tolerance:.3e})")]
    NonHermitian { deviation: f64, tolerance: f64 },

    #[error("no cubic root satisfies the Cauchy-transform branch conditions at z = {re}+{im}i")]
    BranchSelectionFailure { re: f64, im: f64 },

    #[error("parameters lie within tolerance of a support-region boundary")]
    BoundaryProximity,

    #[error("closed-form root failed its residual check: |f(c0)| = {residual:.3e} > {bound:.3e}")]
    ResidualCheck { residual: f64, bound: f64 },

    #[error("need cumulants up to order {needed}, got {got}")]
    InsufficientCumulants { needed: usize, got: usize },

    #[error("LAPACK {routine} failed: {detail}")]
    Lapack { routine: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

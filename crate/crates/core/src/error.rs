use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigenvalue {re}{im:+}i lies within {distance:e} of the branch cut (-inf, 0]")]
    BranchCutViolation { re: f64, im: f64, distance: f64 },

    #[error("iteration failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("symbol matrix is not symmetric (residual {residual:e})")]
    NotSymmetric { residual: f64 },

    #[error("real part of the symbol is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotAccretive { min_eigenvalue: f64 },

    #[error("singular space dimension is ambiguous at step {step}: singular value gap {gap:.3} < 10")]
    IllConditioned { step: usize, gap: f64 },

    #[error("direction is not orthogonal to the singular space (relative projection {projection:e})")]
    NotInSperp { projection: f64 },

    #[error("direction vector is zero")]
    ZeroVector,

    #[error("index {k} out of range 0..={max}")]
    IndexOutOfRange { k: usize, max: usize },

    #[error("spectrum of K_t leaves the positive real axis: eigenvalue {re}{im:+}i")]
    SpectrumViolation { re: f64, im: f64 },

    #[error("-1 is numerically an eigenvalue of G_t (distance {distance:e})")]
    SingularShift { distance: f64 },

    #[error("det cos(tJA_t) is degenerate ({det:e})")]
    DegenerateCosine { det: f64 },

    #[error("comparison form is identically zero (Re Q = 0)")]
    DegenerateKappa,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

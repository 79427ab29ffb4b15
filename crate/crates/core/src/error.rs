use thiserror::Error;

/// Errors surfaced by the simulation kernels.
///
/// Numerical-health failures (norm/trace drift, spectral residuals) carry the
/// measured quantity so callers can log it or decide on a fallback.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("system size {l} exceeds the cap of {cap} sites for {context}")]
    SizeCap { l: usize, cap: usize, context: &'static str },

    #[error("state norm drifted by {drift:.3e} at cycle {cycle} (tolerance {tol:.1e})")]
    NormDrift { cycle: usize, drift: f64, tol: f64 },

    #[error("density-matrix trace drifted by {drift:.3e} at cycle {cycle} (tolerance {tol:.1e})")]
    TraceDrift { cycle: usize, drift: f64, tol: f64 },

    #[error("linear-algebra backend failure: {0}")]
    Linalg(String),

    #[error("spectral reconstruction residual {residual:.3e} exceeds {tol:.1e}")]
    SpectralResidual { residual: f64, tol: f64 },

    #[error("expected a real-valued result but found imaginary part {imag:.3e}")]
    ImaginaryResidue { imag: f64 },

    #[error("not enough usable points for a fit: found {found}, need at least {need}")]
    NoSignal { found: usize, need: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("cycle budget of {budget} exhausted before the stopping condition was met")]
    BudgetExceeded { budget: usize },
}

impl From<ndarray_linalg::error::LinalgError> for CoreError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        CoreError::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;

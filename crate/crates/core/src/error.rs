use thiserror::Error;

/// Errors produced by spectral construction, model sampling, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "matrix is not Hermitian: |A[{row},{col}] - conj(A[{col},{row}])| = {deviation:.3e} \
         exceeds tolerance {tolerance:.3e}"
    )]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
        tolerance: f64,
    },

    #[error("eigensolver residual contract violated: {what} residual {residual:.3e} > {tolerance:.3e}")]
    EigenResidual {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("memory guard: {0}")]
    MemoryGuard(String),

    #[error("dimension guard: {0}")]
    DimensionGuard(String),

    #[error("degenerate convolution kernel: gamma and t must both be positive (gamma={gamma}, t={t})")]
    DegenerateKernel { gamma: f64, t: f64 },

    #[error("realization with seed {seed:#018x} failed: {source}")]
    Realization {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("spectrum file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

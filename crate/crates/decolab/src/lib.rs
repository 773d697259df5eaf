//! # decolab
//!
//! A numerical laboratory for entangled system–apparatus states and their
//! environment-induced decoherence.
//!
//! The crate builds density operators in which pure states of a small system
//! are correlated with mixed (multi-microstate) pointer sectors of an
//! apparatus, verifies their spectral and partial-transpose structure against
//! closed forms, measures entanglement and correlation relative to the nearest
//! separable state, and evolves the system–apparatus pair under seeded
//! random-matrix or non-demolition couplings to a finite or continually
//! renewed environment.
//!
//! Module map:
//!
//! - [`qspace`] — tensor-product bookkeeping, partial trace/transpose,
//!   Hermitian eigendecomposition and matrix functions.
//! - [`states`] — the pure-mixed state family, its purification, the nearest
//!   separable and equimixed classical reference states, closed-form spectra.
//! - [`measures`] — entropies, relative entropies, fidelity/Bures distance,
//!   decoherence and relaxation indices, PT minimum eigenvalue, and the
//!   numerical nearest-separable-state certificate.
//! - [`dynamics`] — Hamiltonian assembly, seeded couplings, exact unitary
//!   propagation of a pure-state ensemble, trajectory records.
//! - [`harness`] — scenario configuration, CSV/JSON output, decay-shape
//!   fitting, and the randomized validation battery behind the CLI.

pub mod dynamics;
pub mod harness;
pub mod measures;
pub mod qspace;
pub mod states;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max asymmetry {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("trace is {trace:.17} instead of 1")]
    InvalidTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("vector is not normalized (norm {norm:.17})")]
    NotNormalized { norm: f64 },

    #[error("invalid space layout: {0}")]
    InvalidLayout(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("invalid amplitudes: {0}")]
    InvalidAmplitudes(String),

    #[error("operation supports {supported} sectors, got {got}")]
    UnsupportedSectorCount { got: usize, supported: usize },

    #[error("eigenvalue floor must be positive, got {floor:.3e}")]
    InvalidFloor { floor: f64 },

    #[error("finite-difference step must lie in (0, 1e-3], got {step:.3e}")]
    InvalidStep { step: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error(
        "trajectory diagnostics diverged at step {step}: trace_err {trace_err:.3e}, herm_err {herm_err:.3e}"
    )]
    DiagnosticsDiverged {
        step: usize,
        trace_err: f64,
        herm_err: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

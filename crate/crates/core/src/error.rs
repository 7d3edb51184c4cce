//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SynthDimError>;

#[derive(Debug, Clone, Error)]
pub enum SynthDimError {
    #[error("Fock space dimension {dim} exceeds the capacity limit {limit}")]
    CapacityExceeded { dim: u128, limit: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("mode index {mode} out of range for {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("assembled operator is not Hermitian (max |H - H†| = {max_dev:.3e}); internal bug")]
    HermiticityViolation { max_dev: f64 },

    #[error("eigendecomposition residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ConvergenceFailure { residual: f64, tolerance: f64 },

    #[error("need at least {needed} levels after degeneracy filtering, have {have}")]
    TooFewLevels { needed: usize, have: usize },

    #[error(
        "{dropped} of {total} spacings fall below the degeneracy tolerance; refusing to classify"
    )]
    DegenerateSpectrum { dropped: usize, total: usize },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("operation requires the {expected}-photon sector, state has {actual} photons")]
    WrongSector { expected: usize, actual: usize },

    #[error("calibration inconsistent: reconstructed |z| = {magnitude:.6} exceeds unity bound")]
    CalibrationError { magnitude: f64 },

    #[error("inversion residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    InversionError { residual: f64, tolerance: f64 },

    #[error("weighted DI undefined: state carries no diagonal two-photon weight")]
    ZeroDiagonalWeight,

    #[error("empty averaging window")]
    EmptyWindow,

    #[error("fixed-step integrator failed to converge: trace distance {0:.3e} after halving")]
    StepConvergence(f64),
}

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// One failed density-operator invariant, with the measured defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "defect", rename_all = "kebab-case")]
pub enum Violation {
    /// Largest |ρ_ij − conj(ρ_ji)|.
    NonHermitian(f64),
    /// |Tr ρ − 1|.
    NonUnitTrace(f64),
    /// Magnitude of the most negative eigenvalue.
    NotPositive(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonHermitian(d) => write!(f, "not Hermitian (defect {d:e})"),
            Violation::NonUnitTrace(d) => write!(f, "trace not 1 (defect {d:e})"),
            Violation::NotPositive(d) => write!(f, "not positive (min eigenvalue -{d:e})"),
        }
    }
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported subsystem dimension {0} (supported 2..=64)")]
    UnsupportedDimension(usize),

    #[error("invalid density operator: {}", join(.0))]
    InvalidState(Vec<Violation>),

    #[error("basis is not orthonormal (defect {0:e})")]
    NotOrthonormal(f64),

    #[error("invalid probability vector (defect {0:e})")]
    InvalidProbability(f64),

    #[error("subsystem {index} out of range for {count} subsystems")]
    BadSubsystem { index: usize, count: usize },

    #[error("state is not bipartite ({0} subsystems)")]
    NotBipartite(usize),

    #[error("subsystem dimensions differ: {0} vs {1}")]
    UnequalDimensions(usize, usize),

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid Gaussian state: {0}")]
    InvalidGaussian(String),

    #[error("variance must be positive, got {0}")]
    NonpositiveVariance(f64),

    #[error("invalid binning: {0}")]
    InvalidBinning(String),

    #[error("quadrature did not reach tolerance (error estimate {0:e})")]
    QuadratureFailure(f64),

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("no Alice response for label {label:?} at hidden value {lambda}")]
    MissingResponse { label: String, lambda: usize },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::QuadratureFailure(_) | Error::EigenFailure)
    }
}

use thiserror::Error;

/// Errors produced by the calculus library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported algebra dimension n = {0} (supported: 1..=5)")]
    UnsupportedDimension(usize),

    #[error("operator is singular (reciprocal condition {rcond:.3e})")]
    SingularOperator { rcond: f64 },

    #[error("spectral parameter lies in the S-spectrum (reciprocal condition {rcond:.3e})")]
    SInSpectrum { rcond: f64 },

    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,

    #[error("point lies outside the function domain: {0}")]
    DomainViolation(String),

    #[error("denominator has a zero sphere (center {center}, radius {radius}) in the closed double sector of angle {theta}")]
    ZeroInSector {
        center: f64,
        radius: f64,
        theta: f64,
    },

    #[error("flavor mismatch: {0}")]
    FlavorMismatch(String),

    #[error("domain basis does not span a right submodule (residual {0:.3e})")]
    NonSubmoduleDomain(f64),

    #[error("S-spectrum leaves the double sector: sphere phase {phase:.6} >= phi {phi:.6}")]
    SpectrumOutsideSector { phase: f64, phi: f64 },

    #[error("resolvent estimate certification failed: {0}")]
    CertificationFailed(String),

    #[error("operator is not injective (kernel dimension {0})")]
    NotInjective(usize),

    #[error("function is not in the decaying class")]
    NonDecayingFunction,

    #[error("quadrature did not converge (last change {change:.3e}, tolerance {tol:.3e})")]
    QuadratureNotConverged { change: f64, tol: f64 },

    #[error("function growth is unclassified")]
    UnclassifiedGrowth,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

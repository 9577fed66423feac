use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("all couplings vanish: free particle, no factorization")]
    AllZero,
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("x = {x} is outside the shape domain")]
    OutOfDomain { x: f64 },
    #[error("coupling matrix is defective (discriminant {delta})")]
    NotDiagonalizable { delta: f64 },
    #[error("unstable regime: discriminant {delta} <= 0, ladder operators are not mutually adjoint")]
    UnstableRegime { delta: f64 },
    #[error("operation not available on the {0} branch")]
    UnsupportedBranch(&'static str),
    #[error("supersymmetry is broken: no normalizable zero mode")]
    BrokenSusy,
    #[error("both zero-mode candidates are normalizable")]
    Ambiguous,
    #[error("family is not shape invariant (best residual {residual:e})")]
    NotShapeInvariant { residual: f64 },
    #[error("shape-invariance remainder depends on energy ({r1} at one energy, {r2} at another)")]
    EnergyDependentRemainder { r1: f64, r2: f64 },
    #[error("no level n = {n} in the energy window")]
    NoRoot { n: usize },
    #[error("division by a vanishing {0}")]
    ZeroDivisor(&'static str),
    #[error("eigensolver failed: {0}")]
    SolverFailure(&'static str),
    #[error("step height must be positive, got {0}")]
    NonpositiveStep(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid tabulated shape: {0}")]
    InvalidTable(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

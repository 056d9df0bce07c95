//! Spectral methods on the semi-infinite domain built from rational and
//! exponential Gegenbauer (RG/EG) basis functions, together with a direct
//! transcription of infinite-horizon linear-quadratic regulation problems
//! with state equality constraints and output feedback.
//!
//! The crate is organized around six areas:
//!
//! * [`gegenbauer`] — classical Gegenbauer polynomials on `[-1, 1]`, their
//!   Gauss rules, normalization constants, and Christoffel-number bounds.
//! * [`tgbasis`] — the algebraic and exponential mappings between
//!   `[0, inf)` and `(-1, 1)`, the transformed-Gegenbauer (TG) basis, and
//!   the mapped Gauss grid with its integration vector.
//! * [`quadrature`] — semi-infinite weighted quadrature, quadrature to each
//!   grid node, a truncation-error bound, and benchmark error sweeps.
//! * [`interpolation`] — the discrete TG transform and interpolation
//!   stability diagnostics.
//! * [`ihoc`] — the constrained output-feedback regulator problem, its
//!   integral spectral (IS) and integral pseudospectral (IPS)
//!   transcriptions, the KKT solver, and solution recovery.

pub mod gegenbauer;
pub mod ihoc;
pub mod interpolation;
pub mod quadrature;
pub mod tgbasis;

mod special;

pub use gegenbauer::{christoffel_bound, gauss_rule, GaussRule, GegenbauerIndex};
pub use tgbasis::{TGFamily, TGGrid, TGMap};

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("Gegenbauer index must exceed -1/2, got {0}")]
    IndexOutOfRange(f64),
    #[error("root refinement failed to converge for node {index} of the degree-{degree} rule")]
    RootConvergence { degree: usize, index: usize },
    #[error("the inverse map is singular at x = 1")]
    MapSingular,
    #[error("TG weight function is singular at t = 0 for alpha < 1/2")]
    WeightSingular,
    #[error("integrand evaluated to a non-finite value at t = {t}")]
    NonFiniteIntegrand { t: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("equality constraints are inconsistent (residual {0:.3e})")]
    InfeasibleConstraints(f64),
    #[error("KKT system is singular even after regularization")]
    SingularSystem,
    #[error("output trajectory matrix is numerically rank deficient")]
    RankDeficientOutputs,
    #[error("mesh size {0} is too large for the pseudospectral transcription (limit {1})")]
    MeshTooLarge(usize, usize),
    #[error("unknown benchmark problem id `{0}`")]
    UnknownProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

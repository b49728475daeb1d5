//! Numerical toolkit for measures of operator commutativity.
//!
//! The library computes how far two Hilbert space operators are from
//! commuting, measured through unitarily invariant norms of their
//! commutator, and provides everything that analysis rests on:
//!
//! * [`mat`]: dense complex matrices with the kernels the rest of the
//!   crate needs (commutators, determinants, a Hermitian eigensolver,
//!   singular values).
//! * [`norms`]: Schatten and Ky Fan norms as symmetric gauge functions
//!   of singular values, plus the normalization constant every closed
//!   form below is scaled by.
//! * [`measures`]: the commutator measure itself and its closed forms
//!   for rank-one projections, density operators, and unitaries.
//! * [`ensembles`]: seeded, platform-independent random matrices (Haar
//!   unitaries, random projections and densities, Bloch sphere helpers).
//! * [`preservers`]: the canonical forms of maps that leave the
//!   commutator measure invariant, applied as executable transforms.
//! * [`reconstruct`]: recovery of a hidden symmetry from probe queries,
//!   with query budgets, decision margins, and validation residuals.
//! * [`extremal`]: closed forms and sampling oracles for the largest
//!   commutator measure reachable against a fixed operator.
//! * [`exec`]: data-parallel helpers (rayon behind the `parallel`
//!   feature, sequential fallback otherwise) with scheduling-independent
//!   results.
//!
//! All randomized entry points take explicit seeds and produce identical
//! results across platforms and thread counts.

pub mod ensembles;
pub mod exec;
pub mod extremal;
pub mod json;
pub mod mat;
pub mod measures;
pub mod norms;
pub mod preservers;
pub mod reconstruct;

mod eigen;

pub use mat::{CMat, UnitVec, C64};
pub use norms::NormSpec;

/// Errors for every fallible operation in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operands or arguments have incompatible dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A matrix required to be Hermitian is not, within tolerance.
    #[error("not Hermitian: {0}")]
    NotHermitian(String),
    /// A matrix required to be unitary is not, within tolerance.
    #[error("not unitary: {0}")]
    NotUnitary(String),
    /// A matrix required to be a density operator fails its invariants.
    #[error("not a density operator: {0}")]
    NotDensity(String),
    /// A matrix required to be a rank-one projection fails its invariants.
    #[error("not a rank-one projection: {0}")]
    NotProjection(String),
    /// An iterative kernel exhausted its iteration cap.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// Inputs are structurally invalid (out of range, non-finite, empty).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A textual argument failed to parse; the message names the token.
    #[error("parse error: {0}")]
    Parse(String),
    /// Probe data is inconsistent with any map of the expected form.
    #[error("not a preserver: {0}")]
    NotPreserver(String),
    /// A branch decision fell inside the ambiguity margin.
    #[error("ambiguous branch: {0}")]
    AmbiguousBranch(String),
    /// A quantity that should be structurally guaranteed was violated.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shared numeric tolerances, named once so every module agrees.
pub mod tol {
    /// Absolute comparison floor for quantities of unit scale.
    pub const ABS: f64 = 1e-12;
    /// Relative tolerance for derived quantities (norms, measures).
    pub const REL: f64 = 1e-10;
    /// Acceptance tolerance for structural invariant checks
    /// (Hermiticity, projection and density defects).
    pub const STRUCT: f64 = 1e-10;
    /// Unitarity defect accepted for matrices fed into transforms.
    pub const UNITARY_IN: f64 = 1e-8;
    /// Convergence floor for the Jacobi eigensolver, relative to the
    /// Frobenius norm of the input.
    pub const JACOBI_REL: f64 = 1e-14;
    /// Jacobi sweep cap; exceeding it is an error, not a warning.
    pub const JACOBI_MAX_SWEEPS: usize = 100;
}

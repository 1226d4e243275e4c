//! Error type shared across the crate.
//!
//! Contract violations on pure algebra (degree or dimension mismatches in
//! wedge, interior products and so on) panic, since they indicate programming
//! errors.  Everything data driven (structure validation, jet documents,
//! inversion of linear maps onto their image) reports through [`Error`].

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A named structural invariant failed validation.
    #[error("invariant `{name}` violated (residual {residual:.3e})")]
    InvariantViolation { name: String, residual: f64 },

    /// A value that must lie in the image of a linear map does not,
    /// beyond tolerance.
    #[error("value outside the target subspace (relative residual {residual:.3e})")]
    OffImage { residual: f64 },

    /// Two independent computations of the same quantity disagree; the
    /// input data cannot come from a single jet.
    #[error("inconsistent input: `{check}` disagrees (relative residual {residual:.3e})")]
    Inconsistent { check: String, residual: f64 },

    /// Operation not defined for this complex dimension.
    #[error("unsupported dimension n = {n}: {reason}")]
    UnsupportedDimension { n: usize, reason: String },

    /// Jet document violates the schema.
    #[error("schema violation: {0}")]
    Schema(String),

    /// Unknown torsion class name in user input.
    #[error("unknown torsion class `{0}`")]
    UnknownClass(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invariant(name: impl Into<String>, residual: f64) -> Self {
        Error::InvariantViolation { name: name.into(), residual }
    }

    pub fn inconsistent(check: impl Into<String>, residual: f64) -> Self {
        Error::Inconsistent { check: check.into(), residual }
    }
}

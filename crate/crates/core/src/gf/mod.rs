//! Finite fields `GF(p^q)` with `p^q ≤ 2^16` and dense matrices over them.

mod field;
mod matrix;

pub use field::{Fe, Field, FieldSpec};
pub use matrix::{determinant, mat_inv, mat_mul, vandermonde, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GfError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("field order {p}^{q} exceeds 2^16")]
    OrderTooLarge { p: u32, q: u32 },
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("reduction polynomial: {0}")]
    BadPolynomial(String),
    #[error("reduction polynomial is reducible")]
    Reducible,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{points} evaluation points requested but the field has only {order} elements")]
    TooManyPoints { points: usize, order: u32 },
}

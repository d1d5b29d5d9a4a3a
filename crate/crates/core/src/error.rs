//! Crate-wide error type.
//!
//! Variants fall into two classes: numerical failures (singular matrices,
//! non-converging factorizations) and precondition violations (parameters
//! outside the regime a criterion is derived for). [`Error::is_numerical`]
//! distinguishes them so callers can map the classes to exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix {name} is numerically singular (|det| = {det:.3e}, tolerance {tol:.3e})")]
    SingularMatrix {
        name: &'static str,
        det: f64,
        tol: f64,
    },

    #[error("linear-algebra backend failure in {op}: {source}")]
    Linalg {
        op: &'static str,
        #[source]
        source: ndarray_linalg::error::LinalgError,
    },

    #[error("determinant ratio {value:.6e} is not positive; cannot take square root")]
    NonPositiveDeterminantRatio { value: f64 },

    #[error("invalid parameter {name} = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("c1 = {c1} > 0: criteria are derived for c1 <= 0 and the positive branch needs a modified criterion")]
    PositiveCrossCorrelation { c1: f64 },

    #[error("kernel is off the separability boundary: tau = {tau} (|tau - 1| must be <= {tol:.1e})")]
    OffBoundary { tau: f64, tol: f64 },

    #[error("coefficient sequence must contain at least one nonzero entry")]
    EmptyCoefficients,

    #[error("coefficient sequence of order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("coefficient sequence is not normalized: sum of |c_m|^2 = {norm} (must be 1 within {tol:.1e})")]
    NotNormalized { norm: f64, tol: f64 },

    #[error("quadratic form is outside the supported two-parameter family (residual {residual:.3e})")]
    OutsideWeightFamily { residual: f64 },

    #[error("Fock cutoff {dim} too small: {what}")]
    CutoffTooSmall { dim: usize, what: &'static str },
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to inputs
    /// outside a criterion's supported regime.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. }
                | Error::Linalg { .. }
                | Error::NonPositiveDeterminantRatio { .. }
        )
    }
}

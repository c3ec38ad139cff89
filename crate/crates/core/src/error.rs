use thiserror::Error;

use crate::channel::Axis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("bias pair ({a}, {b}) was not measured")]
    MissingPair { a: Axis, b: Axis },

    #[error("channel is not unital: |t| = {norm:e} exceeds {tol:e}")]
    NotUnital { norm: f64, tol: f64 },

    #[error("channel is not completely positive: q_{component} = {value}")]
    NotCompletelyPositive { component: &'static str, value: f64 },

    /// Some singular value of the Stokes matrix exceeds one, so the map does
    /// not send the Bloch ball into itself.
    #[error("Stokes matrix is not a contraction: singular value {value}")]
    NotContraction { value: f64 },

    #[error("probability vector is not normalized: sum = {sum}, min = {min}")]
    NotNormalized { sum: f64, min: f64 },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("matrix is not a proper rotation: orthogonality error {orthogonality:e}, det {det}")]
    NotRotation { orthogonality: f64, det: f64 },

    /// The diagonal `(R_zz, R_xx, R_yy)` induces a negative Bell weight, so no
    /// completely positive channel has it.
    #[error("diagonal {gamma:?} is not realizable: Bell weight {value}")]
    InfeasibleDiagonal { gamma: [f64; 3], value: f64 },

    #[error("operator is not positive semidefinite: eigenvalue {value}")]
    NotPositive { value: f64 },

    #[error("internal assertion failed: {0}")]
    AssertionFailure(String),

    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
}

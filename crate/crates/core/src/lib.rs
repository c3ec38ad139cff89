//! Key generation rates and optimal axis compensation for the six-state and
//! BB84 protocols over unital qubit channels.
//!
//! A channel is described by its Stokes parameterization `(R, t)`, an affine
//! map on Bloch vectors with rows and columns indexed in `(z, x, y)` order.
//! Compensation by Alice and Bob is modeled as rotations `O_A`, `O_B` acting as
//! `R' = O_B · R · O_A`.
//!
//! Twelve optimized rates are computed:
//!
//! | protocol        | compensation | accurate | conventional |
//! |-----------------|--------------|----------|--------------|
//! | six-state       | one-side     | `F1`     | `F1~`        |
//! | six-state       | two-side     | `F2`     | `F2~`        |
//! | BB84, z-x plane | one-side     | `G1`     | `G1~`        |
//! | BB84, z-x plane | two-side     | `G2`     | `G2~`        |
//! | BB84, any axis  | one-side     | `J1`     | `J1~`        |
//! | BB84, any axis  | two-side     | `J2`     | `J2~`        |
//!
//! The accurate-estimation rates and all two-side rates have closed forms in
//! terms of (signed) singular values; the conventional one-side rates are
//! computed by [`optimize`]. The [`oracle`] module recomputes `H(X|E) - H(X|Y)`
//! from a purification of the Choi state and is used to validate the closed
//! forms.

pub mod channel;
pub mod entropy;
mod error;
pub mod linalg;
pub mod optimize;
pub mod oracle;
pub mod rates;

pub use channel::{
    biases_from_stokes, choi_from_stokes, compose, family, random_unital, stokes_from_biases,
    validate_unital_cp, Axis, BiasTable, ChoiMatrix, Family, PauliDistribution, QubitChannel,
};
pub use error::{Error, Result};
pub use linalg::{
    rotation2_from_angle, rotation3_from_euler, signed_svd2, signed_svd3, Mat2, Mat3, Rotation2,
    Rotation3, SignedSvd2, SignedSvd3, Vec2, Vec3,
};
pub use optimize::{SearchConfig, SearchResult};
pub use rates::{
    full_report, CompensationPlan, RateKind, RateReport, RateValue, Restriction, UnitalChannel,
};

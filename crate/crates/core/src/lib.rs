//! Elliptic hypergeometric building blocks and randomized verification of
//! multivariable elliptic Jackson summations and Bailey transformations.
//!
//! - [`theta`]: the multiplicative theta function and elliptic shifted factorials
//! - [`kernels`]: index enumeration, the A-type Δ-ratio, theta interpolation identities
//! - [`identities`]: the identity catalog with left/right evaluators and reductions
//! - [`sampler`]: seeded generation of balanced, well-conditioned instances
//! - [`selfcheck`]: seeded property suites for the building blocks

pub mod identities;
pub mod kernels;
pub mod record;
pub mod sampler;
pub mod selfcheck;
pub mod sum;
pub mod theta;

pub use identities::{
    evaluate_lhs, evaluate_rhs, relative_error, Evaluation, Extent, IdentityError, IdentityId,
    IdentityInstance, Param, ParamMap,
};
pub use kernels::{IndexVector, VariableVector};
pub use theta::{Nome, Scalar, ThetaError, TruncationPolicy};

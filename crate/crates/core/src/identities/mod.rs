//! Registry of the summation and transformation identities.
//!
//! Each identity is a balancing constraint plus independent evaluators for
//! its left and right sides. [`reduction`] encodes the relations that tie
//! the identities to one another.

mod catalog;
mod eval;
mod instance;
pub mod reduction;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::KernelError;
use crate::theta::ThetaError;

pub use catalog::{catalog, entry, Arity, CatalogEntry, Constraint, LambdaRule};
pub use eval::{
    evaluate_lhs, evaluate_lhs_with, evaluate_rhs, evaluate_rhs_with, gr_sum_term, relative_error,
    EvalOptions, Evaluation,
};
pub use instance::{Extent, IdentityInstance, ParamMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityId {
    FrenkelTuraev,
    EllipticBailey,
    RsJackson,
    ThetaLemma,
    GrSum,
    GrCorollary,
    BtTransform,
    BcTransform,
    NjcJackson,
    JtsJackson,
    GeneralJackson,
}

impl IdentityId {
    pub const ALL: [IdentityId; 11] = [
        IdentityId::FrenkelTuraev,
        IdentityId::EllipticBailey,
        IdentityId::RsJackson,
        IdentityId::ThetaLemma,
        IdentityId::GrSum,
        IdentityId::GrCorollary,
        IdentityId::BtTransform,
        IdentityId::BcTransform,
        IdentityId::NjcJackson,
        IdentityId::JtsJackson,
        IdentityId::GeneralJackson,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::FrenkelTuraev => "frenkel-turaev",
            IdentityId::EllipticBailey => "elliptic-bailey",
            IdentityId::RsJackson => "rs-jackson",
            IdentityId::ThetaLemma => "theta-lemma",
            IdentityId::GrSum => "gr-sum",
            IdentityId::GrCorollary => "gr-corollary",
            IdentityId::BtTransform => "bt-transform",
            IdentityId::BcTransform => "bc-transform",
            IdentityId::NjcJackson => "njc-jackson",
            IdentityId::JtsJackson => "jts-jackson",
            IdentityId::GeneralJackson => "general-jackson",
        }
    }

    pub fn entry(self) -> &'static CatalogEntry {
        entry(self)
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = IdentityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| IdentityError::UnknownIdentity(s.to_string()))
    }
}

/// Named scalar parameters appearing in the identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    T,
    B1,
    B2,
    B3,
    B4,
}

impl Param {
    pub fn as_str(self) -> &'static str {
        match self {
            Param::A => "a",
            Param::B => "b",
            Param::C => "c",
            Param::D => "d",
            Param::E => "e",
            Param::F => "f",
            Param::G => "g",
            Param::H => "h",
            Param::T => "t",
            Param::B1 => "b1",
            Param::B2 => "b2",
            Param::B3 => "b3",
            Param::B4 => "b4",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdentityError {
    #[error("unknown identity id `{0}`")]
    UnknownIdentity(String),
    #[error("missing parameter `{0}`")]
    MissingParam(Param),
    #[error("unexpected parameter `{0}`")]
    UnexpectedParam(Param),
    #[error("parameter `{0}` is zero")]
    ZeroParam(Param),
    #[error("invalid shape for {id}: {reason}")]
    Shape { id: IdentityId, reason: String },
    #[error("constraint `{constraint}` violated (relative residual {residual:e})")]
    Unbalanced {
        constraint: &'static str,
        residual: f64,
    },
    #[error("pole at index {index:?} in factor {factor}")]
    Pole { index: Vec<usize>, factor: String },
    #[error("non-finite value at index {index:?}")]
    NonFinite { index: Vec<usize> },
    #[error("reduction premise not met: {0}")]
    Premise(String),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip_through_strings() {
        for id in IdentityId::ALL {
            assert_eq!(id.as_str().parse::<IdentityId>().unwrap(), id);
            assert_eq!(id.entry().id, id);
        }
        assert!("gr-summ".parse::<IdentityId>().is_err());
    }
}

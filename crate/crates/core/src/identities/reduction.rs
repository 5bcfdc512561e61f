//! Relations between catalog identities, checked numerically.
//!
//! Each kind maps an instance of one identity onto another (or onto a
//! trivial value) and compares both sides of the mapped relation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::eval::{evaluate_lhs, evaluate_rhs, gr_sum_term, relative_error};
use super::instance::{Extent, IdentityInstance, ParamMap};
use super::{IdentityError, IdentityId, Param};
use crate::kernels::{IndexVector, VariableVector};
use crate::theta::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionKind {
    /// gr-sum at `N = 1`, scaled by `θ(q)`, is the theta-function lemma.
    GrSumToThetaLemma,
    /// gr-corollary is gr-sum with one more variable `z_{n+1} = q^{−N}/a`,
    /// normalized by the `x = (0, …, 0, N)` term.
    GrCorollaryFromGrSum,
    /// bt-transform with `b = 1`: both sides equal 1.
    BtUnitB,
    /// bt-transform with `aq = bc` is gr-corollary with `(b_1..b_4) = (d, e, f, g)`.
    BtToGrCorollary,
    /// gr-corollary at `n = 1` is Frenkel-Turaev with `(a, b..e) → (a z, z b_1..z b_4)`.
    GrCorollaryToFrenkelTuraev,
    /// general-jackson with `(d, e) = (fZ, gZ)` (n odd) or `(Z, fgZ)` (n even) is jts-jackson.
    GeneralToJts,
}

impl ReductionKind {
    pub const ALL: [ReductionKind; 6] = [
        ReductionKind::GrSumToThetaLemma,
        ReductionKind::GrCorollaryFromGrSum,
        ReductionKind::BtUnitB,
        ReductionKind::BtToGrCorollary,
        ReductionKind::GrCorollaryToFrenkelTuraev,
        ReductionKind::GeneralToJts,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReductionKind::GrSumToThetaLemma => "gr-sum-to-theta-lemma",
            ReductionKind::GrCorollaryFromGrSum => "gr-corollary-from-gr-sum",
            ReductionKind::BtUnitB => "bt-unit-b",
            ReductionKind::BtToGrCorollary => "bt-to-gr-corollary",
            ReductionKind::GrCorollaryToFrenkelTuraev => "gr-corollary-to-frenkel-turaev",
            ReductionKind::GeneralToJts => "general-to-jts",
        }
    }

    /// The identity whose instances this reduction consumes.
    pub fn source(self) -> IdentityId {
        match self {
            ReductionKind::GrSumToThetaLemma => IdentityId::GrSum,
            ReductionKind::GrCorollaryFromGrSum => IdentityId::GrCorollary,
            ReductionKind::BtUnitB | ReductionKind::BtToGrCorollary => IdentityId::BtTransform,
            ReductionKind::GrCorollaryToFrenkelTuraev => IdentityId::GrCorollary,
            ReductionKind::GeneralToJts => IdentityId::JtsJackson,
        }
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReductionKind {
    type Err = IdentityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReductionKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| IdentityError::Premise(format!("unknown reduction `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOutcome {
    pub kind: ReductionKind,
    pub holds: bool,
    /// Largest relative error over all compared pairs.
    pub residual: f64,
    pub comparisons: Vec<(&'static str, Scalar, Scalar)>,
}

fn premise(kind: ReductionKind, msg: impl Into<String>) -> IdentityError {
    IdentityError::Premise(format!("{kind}: {}", msg.into()))
}

fn close(a: Scalar, b: Scalar) -> bool {
    relative_error(a, b) <= 1e-12
}

pub fn reduction_check(
    kind: ReductionKind,
    instance: &IdentityInstance,
    tolerance: f64,
) -> Result<ReductionOutcome, IdentityError> {
    if instance.id != kind.source() {
        return Err(premise(
            kind,
            format!("expects a {} instance, got {}", kind.source(), instance.id),
        ));
    }
    let comparisons = match kind {
        ReductionKind::GrSumToThetaLemma => gr_sum_to_lemma(instance)?,
        ReductionKind::GrCorollaryFromGrSum => corollary_from_gr_sum(instance)?,
        ReductionKind::BtUnitB => bt_unit_b(instance)?,
        ReductionKind::BtToGrCorollary => bt_to_corollary(instance)?,
        ReductionKind::GrCorollaryToFrenkelTuraev => corollary_to_ft(instance)?,
        ReductionKind::GeneralToJts => general_to_jts(instance)?,
    };
    let residual = comparisons
        .iter()
        .map(|&(_, x, y)| relative_error(x, y))
        .fold(0.0, f64::max);
    Ok(ReductionOutcome {
        kind,
        holds: residual <= tolerance,
        residual,
        comparisons,
    })
}

type Comparisons = Vec<(&'static str, Scalar, Scalar)>;

fn gr_sum_to_lemma(inst: &IdentityInstance) -> Result<Comparisons, IdentityError> {
    let kind = ReductionKind::GrSumToThetaLemma;
    if inst.order() != 1 {
        return Err(premise(
            kind,
            format!("needs N = 1, got N = {}", inst.order()),
        ));
    }
    let lemma = IdentityInstance::from_parts(
        IdentityId::ThetaLemma,
        inst.params.clone(),
        inst.z.clone(),
        Extent::Free,
        inst.nome,
    )?;
    let theta_q = inst.nome.theta(inst.nome.q)?;
    Ok(vec![
        (
            "theta(q) * gr-sum lhs vs theta-lemma lhs",
            evaluate_lhs(inst)?.value * theta_q,
            evaluate_lhs(&lemma)?.value,
        ),
        (
            "theta(q) * gr-sum rhs vs theta-lemma rhs",
            evaluate_rhs(inst)?.value * theta_q,
            evaluate_rhs(&lemma)?.value,
        ),
    ])
}

fn corollary_from_gr_sum(inst: &IdentityInstance) -> Result<Comparisons, IdentityError> {
    let order = inst.order();
    let a = inst.param(Param::A);
    let mut z = inst.z.entries().to_vec();
    z.push(inst.nome.q_pow(-(order as i64)) / a);
    let n1 = z.len();
    let params: ParamMap = [Param::B1, Param::B2, Param::B3, Param::B4]
        .into_iter()
        .map(|p| (p, inst.param(p)))
        .collect();
    let gr = IdentityInstance::from_parts(
        IdentityId::GrSum,
        params,
        VariableVector::new(z)?,
        Extent::Terminating(order),
        inst.nome,
    )?;
    let mut corner = IndexVector::zeros(n1);
    corner.0[n1 - 1] = order;
    let norm = gr_sum_term(&gr, &corner)?;
    Ok(vec![
        (
            "gr-sum lhs / corner term vs gr-corollary lhs",
            evaluate_lhs(&gr)?.value / norm,
            evaluate_lhs(inst)?.value,
        ),
        (
            "gr-sum rhs / corner term vs gr-corollary rhs",
            evaluate_rhs(&gr)?.value / norm,
            evaluate_rhs(inst)?.value,
        ),
    ])
}

fn bt_unit_b(inst: &IdentityInstance) -> Result<Comparisons, IdentityError> {
    let kind = ReductionKind::BtUnitB;
    let b = inst.param(Param::B);
    if !close(b, Scalar::new(1.0, 0.0)) {
        return Err(premise(kind, format!("needs b = 1, got b = {b}")));
    }
    let one = Scalar::new(1.0, 0.0);
    Ok(vec![
        ("bt lhs vs 1", evaluate_lhs(inst)?.value, one),
        ("bt rhs vs 1", evaluate_rhs(inst)?.value, one),
    ])
}

fn bt_to_corollary(inst: &IdentityInstance) -> Result<Comparisons, IdentityError> {
    let kind = ReductionKind::BtToGrCorollary;
    let p = |k: Param| inst.param(k);
    let aq = p(Param::A) * inst.nome.q;
    if !close(aq, p(Param::B) * p(Param::C)) {
        return Err(premise(kind, "needs aq = bc"));
    }
    let params = ParamMap::from([
        (Param::A, p(Param::A)),
        (Param::B1, p(Param::D)),
        (Param::B2, p(Param::E)),
        (Param::B3, p(Param::F)),
        (Param::B4, p(Param::G)),
    ]);
    let cor = IdentityInstance::from_parts(
        IdentityId::GrCorollary,
        params,
        inst.z.clone(),
        inst.extent.clone(),
        inst.nome,
    )?;
    Ok(vec![
        (
            "bt lhs vs gr-corollary lhs",
            evaluate_lhs(inst)?.value,
            evaluate_lhs(&cor)?.value,
        ),
        (
            "bt rhs vs gr-corollary rhs",
            evaluate_rhs(inst)?.value,
            evaluate_rhs(&cor)?.value,
        ),
    ])
}

fn corollary_to_ft(inst: &IdentityInstance) -> Result<Comparisons, IdentityError> {
    let kind = ReductionKind::GrCorollaryToFrenkelTuraev;
    if inst.n() != 1 {
        return Err(premise(kind, format!("needs n = 1, got n = {}", inst.n())));
    }
    let z = inst.z[0];
    let p = |k: Param| inst.param(k);
    let params = ParamMap::from([
        (Param::A, p(Param::A) * z),
        (Param::B, p(Param::B1) * z),
        (Param::C, p(Param::B2) * z),
        (Param::D, p(Param::B3) * z),
        (Param::E, p(Param::B4) * z),
    ]);
    let ft = IdentityInstance::from_parts(
        IdentityId::FrenkelTuraev,
        params,
        VariableVector::empty(),
        inst.extent.clone(),
        inst.nome,
    )?;
    Ok(vec![
        (
            "gr-corollary lhs vs frenkel-turaev lhs",
            evaluate_lhs(inst)?.value,
            evaluate_lhs(&ft)?.value,
        ),
        (
            "gr-corollary rhs vs frenkel-turaev rhs",
            evaluate_rhs(inst)?.value,
            evaluate_rhs(&ft)?.value,
        ),
    ])
}

/// Maps a jts-jackson instance onto the two-constraint summation.
pub fn general_from_jts(inst: &IdentityInstance) -> Result<IdentityInstance, IdentityError> {
    if inst.id != IdentityId::JtsJackson {
        return Err(premise(
            ReductionKind::GeneralToJts,
            "expects a jts-jackson instance",
        ));
    }
    let p = |k: Param| inst.param(k);
    let zz = inst.z_product;
    let (d, e, t) = (p(Param::D), p(Param::E), p(Param::T));
    let (gd, ge) = if inst.n() % 2 == 1 {
        (d * zz, e * zz)
    } else {
        (zz, d * e * zz)
    };
    let params = ParamMap::from([
        (Param::A, p(Param::A)),
        (Param::B, p(Param::B)),
        (Param::C, p(Param::C)),
        (Param::D, gd),
        (Param::E, ge),
        (Param::F, d),
        (Param::G, e),
        (Param::H, t / (d * e * zz * zz)),
        (Param::T, t),
    ]);
    IdentityInstance::from_parts(
        IdentityId::GeneralJackson,
        params,
        inst.z.clone(),
        inst.extent.clone(),
        inst.nome,
    )
}

fn general_to_jts(inst: &IdentityInstance) -> Result<Comparisons, IdentityError> {
    let general = general_from_jts(inst)?;
    Ok(vec![
        (
            "general lhs vs jts lhs",
            evaluate_lhs(&general)?.value,
            evaluate_lhs(inst)?.value,
        ),
        (
            "general rhs vs jts rhs",
            evaluate_rhs(&general)?.value,
            evaluate_rhs(inst)?.value,
        ),
    ])
}

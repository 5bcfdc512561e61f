use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::catalog::{Arity, CatalogEntry, Constraint, LambdaRule};
use super::{IdentityError, IdentityId, Param};
use crate::kernels::{IndexVector, VariableVector};
use crate::theta::{int_pow, Nome, Scalar};

pub type ParamMap = BTreeMap<Param, Scalar>;

/// Residual allowed for an externally supplied, already balanced instance.
pub const BALANCE_TOLERANCE: f64 = 1e-12;

/// Size of the summation domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extent {
    /// No order parameter (the theta-function lemma).
    Free,
    /// Scalar `N`.
    Terminating(usize),
    /// Box limits `N_1, …, N_n`.
    Box(IndexVector),
}

impl Extent {
    /// `N`, or `|N|` for a box; 0 when there is no order parameter.
    pub fn total(&self) -> usize {
        match self {
            Extent::Free => 0,
            Extent::Terminating(n) => *n,
            Extent::Box(limits) => limits.total(),
        }
    }
}

/// One fully determined parameter assignment for one identity.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityInstance {
    pub id: IdentityId,
    pub extent: Extent,
    pub params: ParamMap,
    pub z: VariableVector,
    pub nome: Nome,
    /// `Z = z_1⋯z_n` (1 for one-variable identities).
    pub z_product: Scalar,
    pub lambda: Option<Scalar>,
}

fn check_shape(
    entry: &CatalogEntry,
    z: &VariableVector,
    extent: &Extent,
) -> Result<(), IdentityError> {
    let shape = |reason: String| IdentityError::Shape {
        id: entry.id,
        reason,
    };
    match entry.arity {
        Arity::OneVariable if !z.is_empty() => {
            return Err(shape("one-variable identity takes no z-vector".into()))
        }
        Arity::OneVariable => {}
        _ if z.is_empty() => return Err(shape("at least one variable z_i is required".into())),
        _ => {}
    }
    match (entry.arity, extent) {
        (Arity::Free, Extent::Free) => Ok(()),
        (Arity::Box, Extent::Box(limits)) if limits.len() == z.len() => Ok(()),
        (Arity::Box, Extent::Box(limits)) => Err(shape(format!(
            "{} box limits for {} variables",
            limits.len(),
            z.len()
        ))),
        (Arity::OneVariable | Arity::Exact | Arity::Bounded, Extent::Terminating(_)) => Ok(()),
        (_, other) => Err(shape(format!(
            "extent {other:?} does not fit the summation domain"
        ))),
    }
}

fn monomial_without(
    c: &Constraint,
    params: &ParamMap,
    z_product: Scalar,
    nome: &Nome,
    order: usize,
    skip: Option<Param>,
) -> Scalar {
    let mut v = int_pow(z_product, c.z_power as i64)
        * nome.q_pow(c.q_per_order as i64 * order as i64 + c.q_offset as i64);
    for &(p, e) in c.exponents {
        if Some(p) != skip {
            v *= int_pow(params[&p], e as i64);
        }
    }
    v
}

/// Relative residual `|m − 1|` of the constraint monomial `m`.
pub fn constraint_residual(
    c: &Constraint,
    params: &ParamMap,
    z_product: Scalar,
    nome: &Nome,
    order: usize,
) -> f64 {
    (monomial_without(c, params, z_product, nome, order, None) - 1.0).norm()
}

impl IdentityInstance {
    /// Completes `partial` (exactly the free parameters) by solving every
    /// balancing constraint for its dependent parameter.
    pub fn solve_balancing(
        id: IdentityId,
        partial: &ParamMap,
        z: VariableVector,
        extent: Extent,
        nome: Nome,
    ) -> Result<Self, IdentityError> {
        let entry = id.entry();
        check_shape(entry, &z, &extent)?;
        for &p in entry.free {
            match partial.get(&p) {
                None => return Err(IdentityError::MissingParam(p)),
                Some(v) if v.norm() == 0.0 || !v.is_finite() => {
                    return Err(IdentityError::ZeroParam(p))
                }
                Some(_) => {}
            }
        }
        if let Some(extra) = partial.keys().find(|p| !entry.free.contains(p)) {
            return Err(IdentityError::UnexpectedParam(*extra));
        }
        let z_product = z.product();
        let order = extent.total();
        let mut params = partial.clone();
        for c in entry.constraints {
            let rest = monomial_without(c, &params, z_product, &nome, order, Some(c.dependent));
            // dep^e · rest = 1 with e = ±1
            let value = if c.dependent_exponent() == 1 {
                rest.inv()
            } else {
                rest
            };
            params.insert(c.dependent, value);
        }
        Self::assemble(id, params, z, extent, nome, 1e-13)
    }

    /// Builds an instance from a complete parameter map, checking every
    /// constraint to [`BALANCE_TOLERANCE`].
    pub fn from_parts(
        id: IdentityId,
        params: ParamMap,
        z: VariableVector,
        extent: Extent,
        nome: Nome,
    ) -> Result<Self, IdentityError> {
        let entry = id.entry();
        check_shape(entry, &z, &extent)?;
        let wanted = entry.all_params();
        for &p in &wanted {
            match params.get(&p) {
                None => return Err(IdentityError::MissingParam(p)),
                Some(v) if v.norm() == 0.0 || !v.is_finite() => {
                    return Err(IdentityError::ZeroParam(p))
                }
                Some(_) => {}
            }
        }
        if let Some(extra) = params.keys().find(|p| !wanted.contains(p)) {
            return Err(IdentityError::UnexpectedParam(*extra));
        }
        Self::assemble(id, params, z, extent, nome, BALANCE_TOLERANCE)
    }

    fn assemble(
        id: IdentityId,
        params: ParamMap,
        z: VariableVector,
        extent: Extent,
        nome: Nome,
        tolerance: f64,
    ) -> Result<Self, IdentityError> {
        let entry = id.entry();
        let z_product = z.product();
        for c in entry.constraints {
            let v = params[&c.dependent];
            if v.norm() == 0.0 || !v.is_finite() {
                return Err(IdentityError::ZeroParam(c.dependent));
            }
            let residual = constraint_residual(c, &params, z_product, &nome, extent.total());
            if !(residual <= tolerance) {
                return Err(IdentityError::Unbalanced {
                    constraint: c.display,
                    residual,
                });
            }
        }
        let lambda = entry.lambda.map(|rule| {
            let p = |k: Param| params[&k];
            let a2q = p(Param::A) * p(Param::A) * nome.q;
            match rule {
                LambdaRule::OverBcd => a2q / (p(Param::B) * p(Param::C) * p(Param::D)),
                LambdaRule::OverBde => a2q / (p(Param::B) * p(Param::D) * p(Param::E)),
            }
        });
        Ok(Self {
            id,
            extent,
            params,
            z,
            nome,
            z_product,
            lambda,
        })
    }

    pub fn entry(&self) -> &'static CatalogEntry {
        self.id.entry()
    }

    /// Number of variables `z_i` (0 for one-variable identities).
    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn order(&self) -> usize {
        self.extent.total()
    }

    pub fn param(&self, p: Param) -> Scalar {
        self.params[&p]
    }

    /// Largest constraint residual of the instance.
    pub fn residual(&self) -> f64 {
        self.entry()
            .constraints
            .iter()
            .map(|c| constraint_residual(c, &self.params, self.z_product, &self.nome, self.order()))
            .fold(0.0, f64::max)
    }

    /// Same instance with two parameters exchanged; constraints are
    /// re-checked and derived quantities recomputed.
    pub fn with_swapped(&self, x: Param, y: Param) -> Result<Self, IdentityError> {
        let mut params = self.params.clone();
        let vx = params[&x];
        let vy = params[&y];
        params.insert(x, vy);
        params.insert(y, vx);
        Self::from_parts(
            self.id,
            params,
            self.z.clone(),
            self.extent.clone(),
            self.nome,
        )
    }

    /// Same instance with the variables permuted: `z'_k = z_{perm[k]}`
    /// (and box limits permuted alongside).
    pub fn with_permuted_variables(&self, perm: &[usize]) -> Result<Self, IdentityError> {
        let z = VariableVector::new(perm.iter().map(|&i| self.z[i]).collect())?;
        let extent = match &self.extent {
            Extent::Box(limits) => {
                Extent::Box(IndexVector(perm.iter().map(|&i| limits[i]).collect()))
            }
            other => other.clone(),
        };
        Self::from_parts(self.id, self.params.clone(), z, extent, self.nome)
    }
}

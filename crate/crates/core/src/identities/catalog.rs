use super::{IdentityId, Param};
use Param::*;

/// Shape of the summation domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    /// One-variable terminating sum over `0..=N`; no `z`-vector.
    OneVariable,
    /// `n` variables, box `0..=N_i` in each coordinate.
    Box,
    /// `n` variables, `|x| = 1`; no `N`.
    Free,
    /// `n` variables, `|x| = N`.
    Exact,
    /// `n` variables, `|x| ≤ N`.
    Bounded,
}

impl Arity {
    pub fn has_variables(self) -> bool {
        self != Arity::OneVariable
    }

    pub fn has_order(self) -> bool {
        self != Arity::Free
    }
}

/// Rule for the derived parameter `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaRule {
    /// `λ = a²q/(bcd)`
    OverBcd,
    /// `λ = a²q/(bde)`
    OverBde,
}

/// A monomial balancing condition
/// `∏ param^e · Z^{z_power} · q^{q_per_order·N + q_offset} = 1`,
/// solved for `dependent` (whose exponent is ±1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub display: &'static str,
    pub dependent: Param,
    pub exponents: &'static [(Param, i32)],
    pub z_power: i32,
    pub q_per_order: i32,
    pub q_offset: i32,
}

impl Constraint {
    pub fn dependent_exponent(&self) -> i32 {
        self.exponents
            .iter()
            .find(|(p, _)| *p == self.dependent)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub id: IdentityId,
    pub title: &'static str,
    pub arity: Arity,
    /// Parameters drawn freely; dependents are solved from `constraints`.
    pub free: &'static [Param],
    pub constraints: &'static [Constraint],
    pub lambda: Option<LambdaRule>,
    /// Whether the summand or right side branches on the parity of `n`.
    pub parity_branched: bool,
    /// Both sides are sums (transformations) rather than sum = product.
    pub transformation: bool,
}

impl CatalogEntry {
    pub fn dependents(&self) -> impl Iterator<Item = Param> + '_ {
        self.constraints.iter().map(|c| c.dependent)
    }

    /// Every parameter an instance carries, free ones first.
    pub fn all_params(&self) -> Vec<Param> {
        self.free.iter().copied().chain(self.dependents()).collect()
    }
}

const JACKSON: Constraint = Constraint {
    display: "a^2 q^(N+1) = b c d e",
    dependent: E,
    exponents: &[(A, 2), (B, -1), (C, -1), (D, -1), (E, -1)],
    z_power: 0,
    q_per_order: 1,
    q_offset: 1,
};

const BAILEY: Constraint = Constraint {
    display: "a^3 q^(N+2) = b c d e f g",
    dependent: G,
    exponents: &[(A, 3), (B, -1), (C, -1), (D, -1), (E, -1), (F, -1), (G, -1)],
    z_power: 0,
    q_per_order: 1,
    q_offset: 2,
};

const BAILEY_Z: Constraint = Constraint {
    display: "a^3 q^(N+2) = b c d e f g Z^2",
    z_power: -2,
    ..BAILEY
};

const JACKSON_Z: Constraint = Constraint {
    display: "a^2 q^(N+1) = b c d e Z^2",
    z_power: -2,
    ..JACKSON
};

static CATALOG: [CatalogEntry; 11] = [
    CatalogEntry {
        id: IdentityId::FrenkelTuraev,
        title: "elliptic Jackson summation (Frenkel-Turaev)",
        arity: Arity::OneVariable,
        free: &[A, B, C, D],
        constraints: &[JACKSON],
        lambda: None,
        parity_branched: false,
        transformation: false,
    },
    CatalogEntry {
        id: IdentityId::EllipticBailey,
        title: "elliptic Bailey transformation, lambda = a^2 q/(b c d)",
        arity: Arity::OneVariable,
        free: &[A, B, C, D, E, F],
        constraints: &[BAILEY],
        lambda: Some(LambdaRule::OverBcd),
        parity_branched: false,
        transformation: true,
    },
    CatalogEntry {
        id: IdentityId::RsJackson,
        title: "A-type elliptic Jackson summation over the box 0 <= x_i <= N_i",
        arity: Arity::Box,
        free: &[A, B, C, D],
        constraints: &[Constraint {
            display: "a^2 q^(|N|+1) = b c d e",
            ..JACKSON
        }],
        lambda: None,
        parity_branched: false,
        transformation: false,
    },
    CatalogEntry {
        id: IdentityId::ThetaLemma,
        title: "theta function identity behind the N = 1 Gustafson-Rakha sum",
        arity: Arity::Free,
        free: &[B1, B2, B3],
        constraints: &[Constraint {
            display: "b1 b2 b3 b4 Z^2 = 1",
            dependent: B4,
            exponents: &[(B1, 1), (B2, 1), (B3, 1), (B4, 1)],
            z_power: 2,
            q_per_order: 0,
            q_offset: 0,
        }],
        lambda: None,
        parity_branched: true,
        transformation: false,
    },
    CatalogEntry {
        id: IdentityId::GrSum,
        title: "elliptic Gustafson-Rakha summation over |x| = N",
        arity: Arity::Exact,
        free: &[B1, B2, B3],
        constraints: &[Constraint {
            display: "q^(N-1) b1 b2 b3 b4 Z^2 = 1",
            dependent: B4,
            exponents: &[(B1, 1), (B2, 1), (B3, 1), (B4, 1)],
            z_power: 2,
            q_per_order: 1,
            q_offset: -1,
        }],
        lambda: None,
        parity_branched: true,
        transformation: false,
    },
    CatalogEntry {
        id: IdentityId::GrCorollary,
        title: "Gustafson-Rakha summation in Frenkel-Turaev form over |x| <= N",
        arity: Arity::Bounded,
        free: &[A, B1, B2, B3],
        constraints: &[Constraint {
            display: "a^2 q^(N+1) = b1 b2 b3 b4 Z^2",
            dependent: B4,
            exponents: &[(A, 2), (B1, -1), (B2, -1), (B3, -1), (B4, -1)],
            z_power: -2,
            q_per_order: 1,
            q_offset: 1,
        }],
        lambda: None,
        parity_branched: true,
        transformation: false,
    },
    CatalogEntry {
        id: IdentityId::BtTransform,
        title: "multivariable elliptic Bailey transformation, lambda = a^2 q/(b c d)",
        arity: Arity::Bounded,
        free: &[A, B, C, D, E, F],
        constraints: &[BAILEY_Z],
        lambda: Some(LambdaRule::OverBcd),
        parity_branched: true,
        transformation: true,
    },
    CatalogEntry {
        id: IdentityId::BcTransform,
        title: "multivariable elliptic Bailey transformation, lambda = a^2 q/(b d e)",
        arity: Arity::Bounded,
        free: &[A, B, C, D, E, F],
        constraints: &[BAILEY_Z],
        lambda: Some(LambdaRule::OverBde),
        parity_branched: true,
        transformation: true,
    },
    CatalogEntry {
        id: IdentityId::NjcJackson,
        title: "multivariable elliptic Jackson summation (inverse of the Gustafson-Rakha form)",
        arity: Arity::Bounded,
        free: &[A, B, C, D],
        constraints: &[JACKSON_Z],
        lambda: None,
        parity_branched: true,
        transformation: false,
    },
    CatalogEntry {
        id: IdentityId::JtsJackson,
        title: "multivariable elliptic Jackson summation with spectator t",
        arity: Arity::Bounded,
        free: &[A, B, C, D, T],
        constraints: &[JACKSON_Z],
        lambda: None,
        parity_branched: true,
        transformation: false,
    },
    CatalogEntry {
        id: IdentityId::GeneralJackson,
        title: "two-constraint multivariable elliptic Jackson summation",
        arity: Arity::Bounded,
        free: &[A, B, C, D, F, G, T],
        constraints: &[
            JACKSON,
            Constraint {
                display: "f g h Z^2 = t",
                dependent: H,
                exponents: &[(F, 1), (G, 1), (H, 1), (T, -1)],
                z_power: 2,
                q_per_order: 0,
                q_offset: 0,
            },
        ],
        lambda: None,
        parity_branched: true,
        transformation: false,
    },
];

pub fn catalog() -> &'static [CatalogEntry] {
    &CATALOG
}

pub fn entry(id: IdentityId) -> &'static CatalogEntry {
    CATALOG
        .iter()
        .find(|e| e.id == id)
        .expect("every identity id has a catalog entry")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_complete_and_consistent() {
        assert_eq!(catalog().len(), 11);
        for id in IdentityId::ALL {
            let e = entry(id);
            assert_eq!(e.id, id);
            for c in e.constraints {
                assert_eq!(c.dependent_exponent().abs(), 1, "{id}: {}", c.display);
                assert!(!e.free.contains(&c.dependent));
                for (p, _) in c.exponents {
                    assert!(
                        e.free.contains(p) || e.dependents().any(|d| d == *p),
                        "{id}: {p} not an instance parameter"
                    );
                }
            }
        }
    }
}

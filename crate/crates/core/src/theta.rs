//! Multiplicative theta function and elliptic shifted factorials.
//!
//! `θ(z; p) = ∏_{j≥0} (1 − p^j z)(1 − p^{j+1}/z)` and
//! `(z)_k = θ(z)θ(qz)⋯θ(q^{k−1}z)` for `k ≥ 0`,
//! `(z)_k = 1/(θ(q^k z)⋯θ(q^{−1} z))` for `k < 0`.
//!
//! At `p = 0` the theta function is `1 − z` exactly and the shifted factorial
//! is the classical `q`-shifted factorial; that path never touches the
//! truncated product.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type Scalar = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error("theta(0) is undefined for a nonzero nome")]
    ZeroArgument,
    #[error("theta product not converged after {max_terms} factors (|p| = {modulus})")]
    TruncationExhausted { max_terms: usize, modulus: f64 },
    #[error("pole of the elliptic shifted factorial: theta(q^{index} z) vanishes")]
    Pole { index: i64 },
    #[error("invalid nome: {0}")]
    InvalidNome(String),
    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),
    #[error("non-finite value (overflow)")]
    NonFinite,
}

/// Cutoff rule for the infinite product defining theta.
///
/// Factors are included while `|p^j z| ≥ epsilon` or `|p^{j+1}/z| ≥ epsilon`
/// (and always while `|p|^j ≥ epsilon · min(1, 1/|z|)`), at most
/// `max_terms` factor pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub epsilon: f64,
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        // Tail below 1e-18 relative for |p| <= 0.9: sum of omitted |terms| <= 10 * epsilon.
        Self {
            epsilon: 1e-20,
            max_terms: 4096,
        }
    }
}

impl TruncationPolicy {
    pub fn new(epsilon: f64, max_terms: usize) -> Result<Self, ThetaError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(ThetaError::InvalidPolicy(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        if max_terms == 0 {
            return Err(ThetaError::InvalidPolicy("max_terms must be >= 1".into()));
        }
        Ok(Self { epsilon, max_terms })
    }
}

/// The pair `(p, q)` together with the truncation policy for theta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nome {
    pub p: Scalar,
    pub q: Scalar,
    pub truncation: TruncationPolicy,
}

impl Nome {
    pub fn new(p: Scalar, q: Scalar) -> Result<Self, ThetaError> {
        Self::with_truncation(p, q, TruncationPolicy::default())
    }

    pub fn with_truncation(
        p: Scalar,
        q: Scalar,
        truncation: TruncationPolicy,
    ) -> Result<Self, ThetaError> {
        if !(p.is_finite() && q.is_finite()) {
            return Err(ThetaError::InvalidNome("p and q must be finite".into()));
        }
        if p.norm() >= 1.0 {
            return Err(ThetaError::InvalidNome(format!(
                "|p| must be < 1, got {}",
                p.norm()
            )));
        }
        if q == Scalar::new(0.0, 0.0) {
            return Err(ThetaError::InvalidNome("q must be nonzero".into()));
        }
        TruncationPolicy::new(truncation.epsilon, truncation.max_terms)?;
        Ok(Self { p, q, truncation })
    }

    /// The `p = 0` degeneration.
    pub fn trigonometric(q: Scalar) -> Result<Self, ThetaError> {
        Self::new(Scalar::new(0.0, 0.0), q)
    }

    pub fn is_trigonometric(&self) -> bool {
        self.p == Scalar::new(0.0, 0.0)
    }

    /// Principal square root of `p`.
    pub fn sqrt_p(&self) -> Scalar {
        self.p.sqrt()
    }

    pub fn theta(&self, z: Scalar) -> Result<Scalar, ThetaError> {
        theta(z, self)
    }

    pub fn pochhammer(&self, z: Scalar, k: i64) -> Result<Scalar, ThetaError> {
        elliptic_pochhammer(z, k, self)
    }

    /// `q^e` by binary exponentiation.
    pub fn q_pow(&self, e: i64) -> Scalar {
        int_pow(self.q, e)
    }
}

/// `base^e` by binary exponentiation on the exact integer exponent.
pub fn int_pow(base: Scalar, e: i64) -> Scalar {
    let mut result = Scalar::new(1.0, 0.0);
    let mut b = base;
    let mut k = e.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            result *= b;
        }
        b *= b;
        k >>= 1;
    }
    if e < 0 {
        result.inv()
    } else {
        result
    }
}

/// `C(k, 2) = k(k-1)/2` in exact integer arithmetic.
pub fn binom2(k: i64) -> i64 {
    k * (k - 1) / 2
}

fn finite(v: Scalar) -> Result<Scalar, ThetaError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ThetaError::NonFinite)
    }
}

pub fn theta(z: Scalar, nome: &Nome) -> Result<Scalar, ThetaError> {
    let one = Scalar::new(1.0, 0.0);
    if nome.is_trigonometric() {
        return finite(one - z);
    }
    if z == Scalar::new(0.0, 0.0) {
        return Err(ThetaError::ZeroArgument);
    }
    let TruncationPolicy { epsilon, max_terms } = nome.truncation;
    let p = nome.p;
    let p_abs = p.norm();
    let inv_z = z.inv();
    let floor = epsilon * (1.0 / z.norm()).min(1.0);

    let mut result = one;
    let mut pj = one; // p^j
    let mut pj_abs = 1.0;
    for _ in 0..max_terms {
        let a = pj * z;
        let pj1 = pj * p;
        let b = pj1 * inv_z;
        if a.norm() < epsilon && b.norm() < epsilon && pj_abs < floor {
            return finite(result);
        }
        result *= (one - a) * (one - b);
        pj = pj1;
        pj_abs *= p_abs;
    }
    Err(ThetaError::TruncationExhausted {
        max_terms,
        modulus: p_abs,
    })
}

/// `θ(z_1, …, z_m) = θ(z_1)⋯θ(z_m)`; the empty product is 1.
pub fn theta_product(zs: &[Scalar], nome: &Nome) -> Result<Scalar, ThetaError> {
    zs.iter()
        .try_fold(Scalar::new(1.0, 0.0), |acc, &z| Ok(acc * theta(z, nome)?))
        .and_then(finite)
}

/// Value of `(z)_k` together with the smallest modulus among the theta
/// factors that end up in a denominator (`+∞` when there are none).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PochhammerParts {
    pub value: Scalar,
    pub min_denominator: f64,
}

/// Evaluates `(z)_k` and reports the smallest theta factor that sits in a
/// denominator. With `invert` the result is `1/(z)_k`, so the factors of a
/// nonnegative shift become denominators; a vanishing denominator factor is
/// reported as [`ThetaError::Pole`] with its index `j` in `θ(q^j z)`.
pub fn pochhammer_parts(
    z: Scalar,
    k: i64,
    invert: bool,
    nome: &Nome,
) -> Result<PochhammerParts, ThetaError> {
    let (lo, hi) = if k >= 0 { (0, k) } else { (k, 0) };
    // Factors are in the denominator when exactly one of (k < 0, invert) holds.
    let in_denominator = (k < 0) != invert;
    let mut prod = Scalar::new(1.0, 0.0);
    let mut min_den = f64::INFINITY;
    for j in lo..hi {
        let f = theta(z * nome.q_pow(j), nome)?;
        if in_denominator {
            let m = f.norm();
            if m == 0.0 {
                return Err(ThetaError::Pole { index: j });
            }
            min_den = min_den.min(m);
        }
        prod *= f;
    }
    let value = if in_denominator { prod.inv() } else { prod };
    Ok(PochhammerParts {
        value: finite(value)?,
        min_denominator: min_den,
    })
}

/// The elliptic shifted factorial `(z)_k` for any integer `k`.
pub fn elliptic_pochhammer(z: Scalar, k: i64, nome: &Nome) -> Result<Scalar, ThetaError> {
    if z == Scalar::new(0.0, 0.0) && !nome.is_trigonometric() && k != 0 {
        return Err(ThetaError::ZeroArgument);
    }
    pochhammer_parts(z, k, false, nome).map(|parts| parts.value)
}

/// `(z_1, …, z_m)_k = (z_1)_k⋯(z_m)_k`; the empty product is 1.
pub fn pochhammer_product(zs: &[Scalar], k: i64, nome: &Nome) -> Result<Scalar, ThetaError> {
    zs.iter()
        .try_fold(Scalar::new(1.0, 0.0), |acc, &z| {
            Ok(acc * elliptic_pochhammer(z, k, nome)?)
        })
        .and_then(finite)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Scalar {
        Scalar::new(re, 0.0)
    }

    fn rel(a: Scalar, b: Scalar) -> f64 {
        (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
    }

    /// Direct product summed until |p|^j < 1e-17, independent of the policy.
    fn theta_direct(z: Scalar, p: f64) -> Scalar {
        let mut r = c(1.0);
        let mut j = 0;
        while p.powi(j) >= 1e-17 {
            r *= (c(1.0) - z * p.powi(j)) * (c(1.0) - c(p.powi(j + 1)) / z);
            j += 1;
        }
        r
    }

    #[test]
    fn trigonometric_theta_is_one_minus_z() {
        let nome = Nome::trigonometric(c(0.5)).unwrap();
        assert_eq!(theta(c(0.5), &nome).unwrap(), c(0.5));
        assert_eq!(theta(c(0.0), &nome).unwrap(), c(1.0));
        let z = Scalar::new(0.3, -1.7);
        assert_eq!(theta(z, &nome).unwrap(), c(1.0) - z);
    }

    #[test]
    fn theta_vanishes_at_one() {
        let nome = Nome::new(c(0.2), c(0.5)).unwrap();
        assert_eq!(theta(c(1.0), &nome).unwrap(), c(0.0));
    }

    #[test]
    fn theta_matches_direct_product() {
        let nome = Nome::new(c(0.1), c(0.5)).unwrap();
        let got = theta(c(2.0), &nome).unwrap();
        assert!(rel(got, theta_direct(c(2.0), 0.1)) < 1e-12);
        let z = Scalar::new(-0.4, 0.9);
        assert!(rel(theta(z, &nome).unwrap(), theta_direct(z, 0.1)) < 1e-12);
    }

    #[test]
    fn theta_errors() {
        let nome = Nome::new(c(0.3), c(0.5)).unwrap();
        assert_eq!(theta(c(0.0), &nome), Err(ThetaError::ZeroArgument));
        let tight =
            Nome::with_truncation(c(0.999), c(0.5), TruncationPolicy::new(1e-20, 10).unwrap())
                .unwrap();
        assert!(matches!(
            theta(c(0.5), &tight),
            Err(ThetaError::TruncationExhausted { max_terms: 10, .. })
        ));
        assert!(Nome::new(c(1.0), c(0.5)).is_err());
        assert!(Nome::new(c(0.1), c(0.0)).is_err());
        assert!(TruncationPolicy::new(0.0, 5).is_err());
        assert!(TruncationPolicy::new(0.1, 0).is_err());
    }

    #[test]
    fn theta_product_cases() {
        let nome = Nome::new(c(0.2), Scalar::new(0.3, 0.4)).unwrap();
        assert_eq!(theta_product(&[], &nome).unwrap(), c(1.0));
        let z = Scalar::new(0.7, 0.2);
        assert_eq!(
            theta_product(&[z], &nome).unwrap(),
            theta(z, &nome).unwrap()
        );
        let trig = Nome::trigonometric(c(0.5)).unwrap();
        assert_eq!(theta_product(&[c(0.5), c(0.5)], &trig).unwrap(), c(0.25));
    }

    #[test]
    fn pochhammer_small_shifts() {
        let nome = Nome::new(c(0.2), Scalar::new(0.6, -0.3)).unwrap();
        let z = Scalar::new(0.8, 0.5);
        assert_eq!(elliptic_pochhammer(z, 0, &nome).unwrap(), c(1.0));
        assert_eq!(
            elliptic_pochhammer(z, 1, &nome).unwrap(),
            theta(z, &nome).unwrap()
        );
        let expect = theta(z / nome.q, &nome).unwrap().inv();
        assert!(rel(elliptic_pochhammer(z, -1, &nome).unwrap(), expect) < 1e-15);
    }

    #[test]
    fn pochhammer_trigonometric_oracle() {
        let nome = Nome::trigonometric(c(0.5)).unwrap();
        let got = elliptic_pochhammer(c(0.3), 3, &nome).unwrap();
        let expect = (1.0 - 0.3) * (1.0 - 0.15) * (1.0 - 0.075);
        assert!(rel(got, c(expect)) < 1e-15);
    }

    #[test]
    fn pochhammer_pole_reports_index() {
        let q = c(0.5);
        let nome = Nome::new(c(0.1), q).unwrap();
        // theta(q^{-2} z) vanishes when z = q^2.
        let z = q * q;
        assert_eq!(
            elliptic_pochhammer(z, -3, &nome),
            Err(ThetaError::Pole { index: -2 })
        );
        // Positive shifts just give zero.
        assert_eq!(elliptic_pochhammer(c(1.0), 2, &nome).unwrap(), c(0.0));
    }

    #[test]
    fn pochhammer_product_against_factor_oracle() {
        let nome = Nome::new(c(0.05), Scalar::new(0.4, 0.7)).unwrap();
        let a = Scalar::new(1.2, -0.3);
        let b = Scalar::new(-0.5, 0.6);
        assert_eq!(pochhammer_product(&[], 5, &nome).unwrap(), c(1.0));
        assert_eq!(
            pochhammer_product(&[a], 3, &nome).unwrap(),
            elliptic_pochhammer(a, 3, &nome).unwrap()
        );
        let q = nome.q;
        let oracle = theta_direct_complex(a, 0.05)
            * theta_direct_complex(a * q, 0.05)
            * theta_direct_complex(b, 0.05)
            * theta_direct_complex(b * q, 0.05);
        assert!(rel(pochhammer_product(&[a, b], 2, &nome).unwrap(), oracle) < 1e-13);
    }

    fn theta_direct_complex(z: Scalar, p: f64) -> Scalar {
        theta_direct(z, p)
    }

    #[test]
    fn int_pow_matches_repeated_products() {
        let q = Scalar::new(0.9, 0.3);
        let mut acc = c(1.0);
        for e in 0..60 {
            assert!(rel(int_pow(q, e), acc) < 1e-13);
            assert!(rel(int_pow(q, -e), acc.inv()) < 1e-13);
            acc *= q;
        }
        assert_eq!(binom2(0), 0);
        assert_eq!(binom2(1), 0);
        assert_eq!(binom2(5), 10);
        assert_eq!(binom2(-2), 3);
    }
}

//! Shared kernels of the multivariable sums: summation-index enumeration,
//! the A-type Δ-ratio and the two classical theta interpolation identities.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::theta::{binom2, elliptic_pochhammer, theta, Nome, Scalar, ThetaError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("vanishing denominator theta(z_{j}/z_{i}) for i = {i}, j = {j}")]
    CoincidentVariables { i: usize, j: usize },
    #[error("zero entry in variable vector at position {0}")]
    ZeroVariable(usize),
    #[error("balancing condition violated (relative residual {0:e})")]
    Unbalanced(f64),
    #[error("vanishing denominator: {0}")]
    Pole(String),
    #[error("degenerate interpolation nodes: theta(bc) or theta(b/c) vanishes")]
    DegenerateNodes,
}

/// A summation multi-index `x = (x_1, …, x_n)` of nonnegative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexVector(pub Vec<usize>);

impl IndexVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|x| = x_1 + ⋯ + x_n`.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for IndexVector {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl std::ops::Index<usize> for IndexVector {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// Nonzero variables `z_1, …, z_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableVector(Vec<Scalar>);

impl VariableVector {
    pub fn new(entries: Vec<Scalar>) -> Result<Self, KernelError> {
        if let Some(i) = entries.iter().position(|z| *z == Scalar::new(0.0, 0.0)) {
            return Err(KernelError::ZeroVariable(i));
        }
        Ok(Self(entries))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.0
    }

    /// `Z = z_1⋯z_n`.
    pub fn product(&self) -> Scalar {
        self.0.iter().product()
    }
}

impl std::ops::Index<usize> for VariableVector {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.0[i]
    }
}

fn check_dims(z: &VariableVector, x: &IndexVector) -> Result<(), KernelError> {
    if z.len() != x.len() {
        return Err(KernelError::Dimension(format!(
            "{} variables but {} indices",
            z.len(),
            x.len()
        )));
    }
    Ok(())
}

/// `Δ(zq^x)/Δ(z) = ∏_{i<j} q^{x_i} θ(q^{x_j−x_i} z_j/z_i) / θ(z_j/z_i)`.
pub fn delta_ratio(
    z: &VariableVector,
    x: &IndexVector,
    nome: &Nome,
) -> Result<Scalar, KernelError> {
    check_dims(z, x)?;
    let n = z.len();
    let mut r = Scalar::new(1.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let ratio = z[j] / z[i];
            let den = theta(ratio, nome)?;
            if den.norm() == 0.0 {
                return Err(KernelError::CoincidentVariables { i, j });
            }
            let shift = x[j] as i64 - x[i] as i64;
            r *= nome.q_pow(x[i] as i64) * theta(nome.q_pow(shift) * ratio, nome)? / den;
        }
    }
    Ok(r)
}

/// The Δ-ratio through elliptic shifted factorials:
/// `(−1)^{|x|} q^{−C(|x|,2)−|x|} ∏_{i,j} (q z_i/z_j)_{x_i} / (q^{−x_j} z_i/z_j)_{x_i}`.
pub fn delta_ratio_alt(
    z: &VariableVector,
    x: &IndexVector,
    nome: &Nome,
) -> Result<Scalar, KernelError> {
    check_dims(z, x)?;
    let n = z.len();
    let total = x.total() as i64;
    let sign = if total % 2 == 0 { 1.0 } else { -1.0 };
    let mut r = nome.q_pow(-binom2(total) - total) * sign;
    for i in 0..n {
        let xi = x[i] as i64;
        for j in 0..n {
            let ratio = z[i] / z[j];
            let num = elliptic_pochhammer(nome.q * ratio, xi, nome)?;
            let den = elliptic_pochhammer(nome.q_pow(-(x[j] as i64)) * ratio, xi, nome)?;
            if den.norm() == 0.0 {
                return Err(KernelError::Pole(format!(
                    "(q^-x_{j} z_{i}/z_{j})_x_{i} vanishes"
                )));
            }
            r *= num / den;
        }
    }
    Ok(r)
}

fn balancing_residual(zs: &[Scalar], bs: &[Scalar], t: Scalar) -> f64 {
    let lhs: Scalar = t * zs.iter().product::<Scalar>();
    let rhs: Scalar = bs.iter().product();
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300)
}

fn tpf_check(zs: &[Scalar], bs: &[Scalar], t: Scalar) -> Result<(), KernelError> {
    if bs.len() != zs.len() + 1 {
        return Err(KernelError::Dimension(format!(
            "expected {} b-parameters, got {}",
            zs.len() + 1,
            bs.len()
        )));
    }
    let residual = balancing_residual(zs, bs, t);
    if !(residual <= 1e-12) {
        return Err(KernelError::Unbalanced(residual));
    }
    Ok(())
}

fn nonzero(v: Scalar, what: impl FnOnce() -> String) -> Result<Scalar, KernelError> {
    if v.norm() == 0.0 {
        Err(KernelError::Pole(what()))
    } else {
        Ok(v)
    }
}

/// Left side of the theta partial-fraction identity:
/// `Σ_k ∏_{j≤n+1} θ(z_k/b_j) / (θ(z_k/t) ∏_{j≠k} θ(z_k/z_j))`,
/// valid when `t z_1⋯z_n = b_1⋯b_{n+1}`.
pub fn tpf_lhs(
    zs: &[Scalar],
    bs: &[Scalar],
    t: Scalar,
    nome: &Nome,
) -> Result<Scalar, KernelError> {
    Ok(tpf_terms(zs, bs, t, nome)?
        .into_iter()
        .collect::<crate::sum::CompensatedSum>()
        .value())
}

/// The individual summands of [`tpf_lhs`], in order of `k`.
pub fn tpf_terms(
    zs: &[Scalar],
    bs: &[Scalar],
    t: Scalar,
    nome: &Nome,
) -> Result<Vec<Scalar>, KernelError> {
    tpf_check(zs, bs, t)?;
    let mut terms = Vec::with_capacity(zs.len());
    for (k, &zk) in zs.iter().enumerate() {
        let mut term = Scalar::new(1.0, 0.0);
        for &b in bs {
            term *= theta(zk / b, nome)?;
        }
        term /= nonzero(theta(zk / t, nome)?, || format!("theta(z_{k}/t)"))?;
        for (j, &zj) in zs.iter().enumerate() {
            if j != k {
                term /= nonzero(theta(zk / zj, nome)?, || format!("theta(z_{k}/z_{j})"))?;
            }
        }
        terms.push(term);
    }
    Ok(terms)
}

/// Right side of the theta partial-fraction identity:
/// `∏_{j≤n+1} θ(b_j/t) / ∏_{j≤n} θ(z_j/t)`.
pub fn tpf_rhs(
    zs: &[Scalar],
    bs: &[Scalar],
    t: Scalar,
    nome: &Nome,
) -> Result<Scalar, KernelError> {
    tpf_check(zs, bs, t)?;
    let mut r = Scalar::new(1.0, 0.0);
    for &b in bs {
        r *= theta(b / t, nome)?;
    }
    for (j, &z) in zs.iter().enumerate() {
        r /= nonzero(theta(z / t, nome)?, || format!("theta(z_{j}/t)"))?;
    }
    Ok(r)
}

/// Two-point interpolation of `f(w) = C θ(aw, a/w)` from its values at `b` and `c`:
/// `f(b) θ(cw, c/w)/θ(cb, c/b) + f(c) θ(bw, b/w)/θ(bc, b/c)`.
pub fn weierstrass_rhs(
    f_b: Scalar,
    f_c: Scalar,
    b: Scalar,
    c: Scalar,
    w: Scalar,
    nome: &Nome,
) -> Result<Scalar, KernelError> {
    let [first, second] = weierstrass_terms(f_b, f_c, b, c, w, nome)?;
    Ok(first + second)
}

/// The two summands of [`weierstrass_rhs`].
pub fn weierstrass_terms(
    f_b: Scalar,
    f_c: Scalar,
    b: Scalar,
    c: Scalar,
    w: Scalar,
    nome: &Nome,
) -> Result<[Scalar; 2], KernelError> {
    let den_b = theta(c * b, nome)? * theta(c / b, nome)?;
    let den_c = theta(b * c, nome)? * theta(b / c, nome)?;
    if den_b.norm() == 0.0 || den_c.norm() == 0.0 {
        return Err(KernelError::DegenerateNodes);
    }
    let first = f_b * theta(c * w, nome)? * theta(c / w, nome)? / den_b;
    let second = f_c * theta(b * w, nome)? * theta(b / w, nome)? / den_c;
    Ok([first, second])
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// All `x ∈ ℤ_{≥0}^n` with `|x| = total`, in descending lexicographic order.
#[derive(Debug, Clone)]
pub struct ExactCompositions {
    current: Option<Vec<usize>>,
}

impl Iterator for ExactCompositions {
    type Item = IndexVector;

    fn next(&mut self) -> Option<IndexVector> {
        let out = self.current.take()?;
        let n = out.len();
        let mut next = out.clone();
        // Rightmost position before the last one that can still give a unit away.
        if let Some(k) = (0..n.saturating_sub(1)).rev().find(|&k| next[k] > 0) {
            let tail: usize = next[k + 1..].iter().sum();
            next[k] -= 1;
            next[k + 1] = tail + 1;
            for v in &mut next[k + 2..] {
                *v = 0;
            }
            self.current = Some(next);
        }
        Some(IndexVector(out))
    }
}

/// Compositions of `total` into `n` nonnegative parts; empty when `n = 0`.
pub fn compositions_exact(total: usize, n: usize) -> ExactCompositions {
    let current = (n > 0).then(|| {
        let mut v = vec![0; n];
        v[0] = total;
        v
    });
    ExactCompositions { current }
}

/// All `x ∈ ℤ_{≥0}^n` with `|x| ≤ bound`: ordered by `|x|`, then as
/// [`compositions_exact`].
pub fn compositions_bounded(bound: usize, n: usize) -> impl Iterator<Item = IndexVector> + Clone {
    (0..=bound).flat_map(move |k| compositions_exact(k, n))
}

/// Cartesian product `∏ {0, …, N_i}`, last coordinate varying fastest.
#[derive(Debug, Clone)]
pub struct BoxIndices {
    limits: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl Iterator for BoxIndices {
    type Item = IndexVector;

    fn next(&mut self) -> Option<IndexVector> {
        let out = self.current.take()?;
        let mut next = out.clone();
        for i in (0..next.len()).rev() {
            if next[i] < self.limits[i] {
                next[i] += 1;
                self.current = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(IndexVector(out))
    }
}

pub fn box_indices(limits: &IndexVector) -> BoxIndices {
    BoxIndices {
        limits: limits.0.clone(),
        current: Some(vec![0; limits.len()]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn c(re: f64) -> Scalar {
        Scalar::new(re, 0.0)
    }

    fn rel(a: Scalar, b: Scalar) -> f64 {
        (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
    }

    fn collect(it: impl Iterator<Item = IndexVector>) -> Vec<Vec<usize>> {
        it.map(|x| x.0).collect()
    }

    #[test]
    fn exact_composition_order() {
        assert_eq!(collect(compositions_exact(0, 3)), vec![vec![0, 0, 0]]);
        assert_eq!(
            collect(compositions_exact(2, 2)),
            vec![vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(
            collect(compositions_exact(2, 3)),
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
        assert_eq!(collect(compositions_exact(3, 1)), vec![vec![3]]);
        assert!(collect(compositions_exact(3, 0)).is_empty());
    }

    /// Brute-force enumeration over the box [0, N]^n filtered by the sum.
    fn brute(total: usize, n: usize, exact: bool) -> BTreeSet<Vec<usize>> {
        collect(box_indices(&IndexVector(vec![total; n])))
            .into_iter()
            .filter(|x| {
                let s: usize = x.iter().sum();
                if exact {
                    s == total
                } else {
                    s <= total
                }
            })
            .collect()
    }

    #[test]
    fn composition_counts_match_binomials_and_brute_force() {
        assert_eq!(compositions_exact(5, 4).count(), 56);
        assert_eq!(binomial(8, 3), 56);
        assert_eq!(compositions_bounded(4, 3).count(), 35);
        assert_eq!(binomial(7, 3), 35);
        for n in 1..=4 {
            for total in 0..=5 {
                let exact = collect(compositions_exact(total, n));
                let set: BTreeSet<_> = exact.iter().cloned().collect();
                assert_eq!(set.len(), exact.len());
                assert_eq!(set, brute(total, n, true));
                assert_eq!(
                    exact.len() as u64,
                    binomial((total + n - 1) as u64, (n - 1) as u64)
                );
                let bounded = collect(compositions_bounded(total, n));
                let bset: BTreeSet<_> = bounded.iter().cloned().collect();
                assert_eq!(bset.len(), bounded.len());
                assert_eq!(bset, brute(total, n, false));
                assert_eq!(bounded.len() as u64, binomial((total + n) as u64, n as u64));
            }
        }
    }

    #[test]
    fn bounded_small_cases() {
        assert_eq!(collect(compositions_bounded(0, 2)), vec![vec![0, 0]]);
        assert_eq!(
            collect(compositions_bounded(1, 2)),
            vec![vec![0, 0], vec![1, 0], vec![0, 1]]
        );
    }

    #[test]
    fn box_counts() {
        assert_eq!(box_indices(&IndexVector(vec![0, 0])).count(), 1);
        assert_eq!(
            collect(box_indices(&IndexVector(vec![1, 2]))),
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
        assert_eq!(box_indices(&IndexVector(vec![2, 2, 2])).count(), 27);
    }

    #[test]
    fn delta_ratio_small_cases() {
        let nome = Nome::trigonometric(c(0.5)).unwrap();
        let z = VariableVector::new(vec![c(1.0), c(0.4)]).unwrap();
        let got = delta_ratio(&z, &IndexVector(vec![1, 0]), &nome).unwrap();
        assert!(rel(got, c(0.5 * 0.2 / 0.6)) < 1e-15);
        assert_eq!(
            delta_ratio(&z, &IndexVector::zeros(2), &nome).unwrap(),
            c(1.0)
        );
        let z1 = VariableVector::new(vec![c(0.7)]).unwrap();
        assert_eq!(
            delta_ratio(&z1, &IndexVector(vec![3]), &nome).unwrap(),
            c(1.0)
        );
        assert!(delta_ratio(&z1, &IndexVector(vec![1, 2]), &nome).is_err());
    }

    #[test]
    fn delta_ratio_alt_one_variable_is_one() {
        let nome = Nome::new(c(0.2), Scalar::new(0.5, 0.4)).unwrap();
        let z = VariableVector::new(vec![Scalar::new(0.9, -0.2)]).unwrap();
        for m in 0..6 {
            let v = delta_ratio_alt(&z, &IndexVector(vec![m]), &nome).unwrap();
            assert!(rel(v, c(1.0)) < 1e-12, "m = {m}: {v}");
        }
    }

    #[test]
    fn coincident_variables_are_reported() {
        let nome = Nome::new(c(0.2), c(0.5)).unwrap();
        let z = VariableVector::new(vec![c(0.7), c(0.7)]).unwrap();
        assert_eq!(
            delta_ratio(&z, &IndexVector(vec![1, 0]), &nome),
            Err(KernelError::CoincidentVariables { i: 0, j: 1 })
        );
        assert!(VariableVector::new(vec![c(1.0), c(0.0)]).is_err());
    }

    #[test]
    fn tpf_one_variable_by_substitution() {
        let nome = Nome::new(c(0.1), c(0.5)).unwrap();
        let z1 = Scalar::new(0.8, 0.3);
        let b1 = Scalar::new(1.1, -0.4);
        let b2 = Scalar::new(-0.3, 0.9);
        let t = b1 * b2 / z1;
        let lhs = tpf_lhs(&[z1], &[b1, b2], t, &nome).unwrap();
        let direct = theta(z1 / b1, &nome).unwrap() * theta(z1 / b2, &nome).unwrap()
            / theta(z1 / t, &nome).unwrap();
        assert!(rel(lhs, direct) < 1e-14);
        let rhs = tpf_rhs(&[z1], &[b1, b2], t, &nome).unwrap();
        assert!(rel(lhs, rhs) < 1e-12);
    }

    #[test]
    fn tpf_rejects_unbalanced_and_wrong_arity() {
        let nome = Nome::new(c(0.1), c(0.5)).unwrap();
        let z = [c(0.8), c(1.3)];
        let b = [c(0.6), c(1.2), c(0.9)];
        assert!(matches!(
            tpf_lhs(&z, &b, c(1.0), &nome),
            Err(KernelError::Unbalanced(_))
        ));
        assert!(matches!(
            tpf_rhs(&z, &b[..2], c(1.0), &nome),
            Err(KernelError::Dimension(_))
        ));
    }

    #[test]
    fn weierstrass_endpoints_and_third_point() {
        let nome = Nome::new(c(0.2), c(0.5)).unwrap();
        let a = Scalar::new(0.7, 0.6);
        let f = |w: Scalar| theta(a * w, &nome).unwrap() * theta(a / w, &nome).unwrap();
        let b = Scalar::new(1.3, -0.2);
        let cc = Scalar::new(-0.4, 0.8);
        let fb = f(b);
        let fc = f(cc);
        assert!(rel(weierstrass_rhs(fb, fc, b, cc, b, &nome).unwrap(), fb) < 1e-15);
        assert!(rel(weierstrass_rhs(fb, fc, b, cc, cc, &nome).unwrap(), fc) < 1e-15);
        let w = Scalar::new(0.5, 0.9);
        assert!(rel(weierstrass_rhs(fb, fc, b, cc, w, &nome).unwrap(), f(w)) < 1e-10);
        assert_eq!(
            weierstrass_rhs(fb, fc, b, b, w, &nome),
            Err(KernelError::DegenerateNodes)
        );
    }
}

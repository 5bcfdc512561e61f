//! Seeded property suites for theta functions, shifted factorials and the
//! interpolation kernels.
//!
//! Each suite draws its own arguments from a ChaCha20 stream and reports the
//! largest relative error seen. Draws whose denominators come closer than
//! [`POLE_GUARD`] to zero are redrawn; the multi-point kernel suites also
//! redraw when an argument lies within relative distance [`SEPARATION`] of a
//! zero of theta, the same rule the sampler applies to `z_i/z_j`, and the
//! partial-fraction and interpolation suites redraw sums whose cancellation
//! exceeds [`CONDITION_CAP`].

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::identities::relative_error;
use crate::kernels::{
    compositions_bounded, delta_ratio, delta_ratio_alt, tpf_lhs, tpf_rhs, tpf_terms,
    weierstrass_rhs, weierstrass_terms, IndexVector, VariableVector,
};
use crate::theta::{binom2, int_pow, pochhammer_parts, theta, theta_product, Nome, Scalar};

pub const THETA_TOLERANCE: f64 = 1e-12;
pub const KERNEL_TOLERANCE: f64 = 1e-10;
pub const ENDPOINT_TOLERANCE: f64 = 1e-14;
pub const POLE_GUARD: f64 = 1e-3;
pub const SEPARATION: f64 = 0.05;
/// Largest admissible `max|term| / |sum|` for the kernel sums:
/// the kernel tolerance over a per-term rounding budget of 1e-14.
pub const CONDITION_CAP: f64 = KERNEL_TOLERANCE / 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub samples: usize,
    /// Draws discarded for coming too close to a pole.
    pub redrawn: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

struct Suite {
    name: &'static str,
    tolerance: f64,
    rng: ChaCha20Rng,
    max_error: f64,
    samples: usize,
    redrawn: usize,
}

impl Suite {
    fn new(name: &'static str, seed: u64, tolerance: f64) -> Self {
        let salt = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        });
        Self {
            name,
            tolerance,
            rng: ChaCha20Rng::seed_from_u64(seed ^ salt),
            max_error: 0.0,
            samples: 0,
            redrawn: 0,
        }
    }

    /// Runs `check` until `count` samples have produced a value; `None`
    /// means the draw was too close to a pole.
    fn run(
        mut self,
        count: usize,
        mut check: impl FnMut(&mut ChaCha20Rng) -> Option<f64>,
    ) -> PropertyOutcome {
        let limit = count * 100;
        while self.samples < count && self.redrawn < limit {
            match check(&mut self.rng) {
                Some(err) => {
                    self.samples += 1;
                    self.max_error =
                        self.max_error
                            .max(if err.is_nan() { f64::INFINITY } else { err });
                }
                None => self.redrawn += 1,
            }
        }
        PropertyOutcome {
            name: self.name.to_string(),
            samples: self.samples,
            redrawn: self.redrawn,
            max_error: self.max_error,
            tolerance: self.tolerance,
            passed: self.samples == count && self.max_error <= self.tolerance,
        }
    }
}

fn polar(rng: &mut ChaCha20Rng, lo: f64, hi: f64) -> Scalar {
    Scalar::from_polar(
        rng.gen_range(lo.ln()..hi.ln()).exp(),
        rng.gen_range(0.0..TAU),
    )
}

fn random_nome(rng: &mut ChaCha20Rng, p_max: f64) -> Nome {
    let p = polar(rng, 0.01, p_max);
    let q = polar(rng, 0.5, 1.5);
    Nome::new(p, q).expect("sampled nome is valid")
}

/// Smallest `|1 − p^j z|`, `|1 − p^{j+1}/z|` over the factors that matter:
/// how close `z` is to a zero of theta.
fn zero_margin(z: Scalar, nome: &Nome) -> f64 {
    let one = Scalar::new(1.0, 0.0);
    let mut m = f64::INFINITY;
    let mut pj = one;
    for _ in 0..64 {
        m = m
            .min((one - pj * z).norm())
            .min((one - pj * nome.p / z).norm());
        pj *= nome.p;
        if pj.norm() * (z.norm() + 1.0 / z.norm()) < 1e-3 {
            break;
        }
    }
    m
}

fn near_zero(zs: &[Scalar], nome: &Nome) -> bool {
    within(zs, nome, POLE_GUARD)
}

fn within(zs: &[Scalar], nome: &Nome, margin: f64) -> bool {
    zs.iter().any(|&z| zero_margin(z, nome) < margin)
}

pub fn theta_inversion(seed: u64, count: usize) -> PropertyOutcome {
    Suite::new("theta inversion", seed, THETA_TOLERANCE).run(count, |rng| {
        let nome = random_nome(rng, 0.5);
        let z = polar(rng, 1e-3, 1e3);
        if near_zero(&[z, z.inv()], &nome) {
            return None;
        }
        let lhs = theta(z.inv(), &nome).ok()?;
        let rhs = -theta(z, &nome).ok()? / z;
        Some(relative_error(lhs, rhs))
    })
}

pub fn theta_quasi_periodicity(seed: u64, count: usize) -> PropertyOutcome {
    Suite::new("theta quasi-periodicity", seed, THETA_TOLERANCE).run(count, |rng| {
        let nome = random_nome(rng, 0.5);
        let z = polar(rng, 1e-3, 1e3);
        if near_zero(&[z, nome.p * z], &nome) {
            return None;
        }
        let lhs = theta(nome.p * z, &nome).ok()?;
        let rhs = -theta(z, &nome).ok()? / z;
        Some(relative_error(lhs, rhs))
    })
}

/// `(a)_k` when no denominator factor is smaller than [`POLE_GUARD`].
fn guarded_pochhammer(a: Scalar, k: i64, nome: &Nome) -> Option<Scalar> {
    let parts = pochhammer_parts(a, k, false, nome).ok()?;
    (parts.min_denominator >= POLE_GUARD).then_some(parts.value)
}

pub fn pochhammer_shift_addition(seed: u64, count: usize) -> PropertyOutcome {
    Suite::new("pochhammer shift addition", seed, THETA_TOLERANCE).run(count, |rng| {
        let nome = random_nome(rng, 0.5);
        let a = polar(rng, 0.2, 5.0);
        let n = rng.gen_range(-6i64..=6);
        let k = rng.gen_range(-6i64..=6);
        let lhs = guarded_pochhammer(a, n + k, &nome)?;
        let rhs =
            guarded_pochhammer(a, n, &nome)? * guarded_pochhammer(a * nome.q_pow(n), k, &nome)?;
        Some(relative_error(lhs, rhs))
    })
}

pub fn pochhammer_negative_shift(seed: u64, count: usize) -> PropertyOutcome {
    Suite::new("pochhammer negative shift", seed, THETA_TOLERANCE).run(count, |rng| {
        let nome = random_nome(rng, 0.5);
        let a = polar(rng, 0.2, 5.0);
        let n = rng.gen_range(0i64..=5);
        let k = rng.gen_range(0i64..=n);
        let b = nome.q_pow(1 - n) / a;
        let den = pochhammer_parts(b, k, true, &nome).ok()?;
        if den.min_denominator < POLE_GUARD {
            return None;
        }
        let lhs = guarded_pochhammer(a, n - k, &nome)?;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = nome.q_pow(binom2(k))
            * int_pow(b, k)
            * sign
            * guarded_pochhammer(a, n, &nome)?
            * den.value;
        Some(relative_error(lhs, rhs))
    })
}

pub fn theta_quadratic(seed: u64, count: usize) -> PropertyOutcome {
    Suite::new("theta quadratic factorization", seed, THETA_TOLERANCE).run(count, |rng| {
        let nome = random_nome(rng, 0.5);
        let s = nome.sqrt_p();
        let z = polar(rng, 0.1, 10.0);
        let factors = [z, -z, s * z, -s * z];
        if near_zero(&factors, &nome) {
            return None;
        }
        let lhs = theta(z * z, &nome).ok()?;
        let rhs = theta_product(&factors, &nome).ok()?;
        let two = theta_product(&[Scalar::new(-1.0, 0.0), s, -s], &nome).ok()?;
        Some(relative_error(lhs, rhs).max(relative_error(two, Scalar::new(2.0, 0.0))))
    })
}

fn separated(zs: &[Scalar], nome: &Nome) -> bool {
    zs.iter().enumerate().all(|(i, &a)| {
        zs[i + 1..].iter().all(|&b| {
            zero_margin(a / b, nome) >= SEPARATION && zero_margin(b / a, nome) >= SEPARATION
        })
    })
}

pub fn delta_cross_formula(seed: u64, count: usize) -> PropertyOutcome {
    Suite::new("delta ratio cross-formula", seed, KERNEL_TOLERANCE).run(count, |rng| {
        let nome = random_nome(rng, 0.3);
        let n = rng.gen_range(1usize..=5);
        let zs: Vec<Scalar> = (0..n).map(|_| polar(rng, 0.3, 3.0)).collect();
        if !separated(&zs, &nome) {
            return None;
        }
        let total = rng.gen_range(0usize..=8);
        let pool: Vec<IndexVector> = compositions_bounded(total, n)
            .filter(|x| x.total() == total)
            .collect();
        let x = &pool[rng.gen_range(0..pool.len())];
        let z = VariableVector::new(zs).ok()?;
        let a = delta_ratio(&z, x, &nome).ok()?;
        let b = delta_ratio_alt(&z, x, &nome).ok()?;
        Some(relative_error(a, b))
    })
}

pub fn theta_partial_fractions(seed: u64, count: usize) -> PropertyOutcome {
    Suite::new("theta partial fractions", seed, KERNEL_TOLERANCE).run(count, |rng| {
        let nome = random_nome(rng, 0.3);
        let n = rng.gen_range(1usize..=5);
        let zs: Vec<Scalar> = (0..n).map(|_| polar(rng, 0.3, 3.0)).collect();
        let bs: Vec<Scalar> = (0..=n).map(|_| polar(rng, 0.3, 3.0)).collect();
        let t = bs.iter().product::<Scalar>() / zs.iter().product::<Scalar>();
        let mut guarded: Vec<Scalar> = zs.iter().map(|&z| z / t).collect();
        guarded.extend(bs.iter().map(|&b| b / t));
        if !separated(&zs, &nome) || within(&guarded, &nome, SEPARATION) {
            return None;
        }
        let terms = tpf_terms(&zs, &bs, t, &nome).ok()?;
        let lhs = tpf_lhs(&zs, &bs, t, &nome).ok()?;
        let rhs = tpf_rhs(&zs, &bs, t, &nome).ok()?;
        let largest = terms.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(largest <= CONDITION_CAP * lhs.norm()) {
            return None;
        }
        Some(relative_error(lhs, rhs))
    })
}

fn weierstrass_draw(
    rng: &mut ChaCha20Rng,
) -> Option<(Nome, [Scalar; 4], impl Fn(Scalar, &Nome) -> Option<Scalar>)> {
    let nome = random_nome(rng, 0.3);
    let [a, b, c, w] = [0; 4].map(|_| polar(rng, 0.3, 3.0));
    let scale = polar(rng, 0.5, 2.0);
    if within(&[b * c, b / c, c / b], &nome, SEPARATION) {
        return None;
    }
    let f = move |w: Scalar, nome: &Nome| Some(scale * theta_product(&[a * w, a / w], nome).ok()?);
    Some((nome, [a, b, c, w], f))
}

pub fn weierstrass_interpolation(seed: u64, count: usize) -> PropertyOutcome {
    Suite::new("weierstrass interpolation", seed, KERNEL_TOLERANCE).run(count, |rng| {
        let (nome, [_, b, c, w], f) = weierstrass_draw(rng)?;
        let lhs = f(w, &nome)?;
        let (fb, fc) = (f(b, &nome)?, f(c, &nome)?);
        let terms = weierstrass_terms(fb, fc, b, c, w, &nome).ok()?;
        if !(terms[0].norm().max(terms[1].norm()) <= CONDITION_CAP * lhs.norm()) {
            return None;
        }
        let rhs = weierstrass_rhs(fb, fc, b, c, w, &nome).ok()?;
        Some(relative_error(lhs, rhs))
    })
}

pub fn weierstrass_endpoints(seed: u64, count: usize) -> PropertyOutcome {
    Suite::new("weierstrass endpoints", seed, ENDPOINT_TOLERANCE).run(count, |rng| {
        let (nome, [_, b, c, _], f) = weierstrass_draw(rng)?;
        let (fb, fc) = (f(b, &nome)?, f(c, &nome)?);
        let at_b = weierstrass_rhs(fb, fc, b, c, b, &nome).ok()?;
        let at_c = weierstrass_rhs(fb, fc, b, c, c, &nome).ok()?;
        Some(relative_error(at_b, fb).max(relative_error(at_c, fc)))
    })
}

/// Theta and shifted-factorial suites, `count` samples each.
pub fn theta_suites(seed: u64, count: usize) -> Vec<PropertyOutcome> {
    vec![
        theta_inversion(seed, count),
        theta_quasi_periodicity(seed, count),
        pochhammer_shift_addition(seed, count),
        pochhammer_negative_shift(seed, count),
        theta_quadratic(seed, count),
    ]
}

/// Δ-ratio, partial-fraction and interpolation suites, `count` samples each.
pub fn kernel_suites(seed: u64, count: usize) -> Vec<PropertyOutcome> {
    vec![
        delta_cross_formula(seed, count),
        theta_partial_fractions(seed, count),
        weierstrass_interpolation(seed, count),
        weierstrass_endpoints(seed, count),
    ]
}

pub fn all_suites(seed: u64, theta_count: usize, kernel_count: usize) -> Vec<PropertyOutcome> {
    let mut out = theta_suites(seed, theta_count);
    out.extend(kernel_suites(seed, kernel_count));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_small_runs() {
        for o in all_suites(11, 200, 100) {
            assert!(o.passed, "{o:?}");
        }
    }

    #[test]
    fn suites_are_deterministic() {
        assert_eq!(all_suites(5, 20, 20), all_suites(5, 20, 20));
    }
}

//! Seeded generation of balanced, well-conditioned identity instances.
//!
//! Every trial gets its own generator, seeded from the master seed and the
//! trial coordinates, so a trial is reproducible in isolation and results do
//! not depend on scheduling order.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::identities::{
    evaluate_lhs, evaluate_rhs, Arity, Evaluation, Extent, IdentityError, IdentityId,
    IdentityInstance, Param, ParamMap,
};
use crate::kernels::{compositions_exact, IndexVector, KernelError, VariableVector};
use crate::record::ComplexRecord;
use crate::theta::{Nome, Scalar, ThetaError, TruncationPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub seed: u64,
    /// Modulus range for free parameters and variables (log-uniform).
    pub modulus_range: (f64, f64),
    /// Modulus range for `q` (log-uniform).
    pub q_range: (f64, f64),
    pub p_values: Vec<ComplexRecord>,
    /// Smallest admissible modulus of a theta factor in a denominator;
    /// 0 disables pole gating, including the variable separation test.
    pub pole_floor: f64,
    /// Largest admissible `max|term| / |sum|` on either side.
    pub condition_cap: f64,
    pub max_resamples: usize,
    /// Smallest relative distance of `z_i/z_j` from a zero `p^k` of theta.
    pub min_pairwise_z_separation: f64,
    /// Admissible modulus range for parameters fixed by balancing.
    pub dependent_range: (f64, f64),
    pub truncation: TruncationPolicy,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            modulus_range: (0.2, 1.5),
            q_range: (0.2, 1.5),
            p_values: [0.0, 0.05, 0.2]
                .into_iter()
                .map(|re| ComplexRecord { re, im: 0.0 })
                .collect(),
            pole_floor: 1e-4,
            condition_cap: 1e6,
            max_resamples: 200,
            min_pairwise_z_separation: 0.05,
            dependent_range: (1e-6, 1e6),
            truncation: TruncationPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid sampler configuration: {0}")]
    Invalid(String),
}

impl SampleConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        for (name, (lo, hi)) in [
            ("modulus_range", self.modulus_range),
            ("q_range", self.q_range),
            ("dependent_range", self.dependent_range),
        ] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return bad(format!(
                    "{name} must satisfy 0 < lo <= hi < inf, got ({lo}, {hi})"
                ));
            }
        }
        for p in &self.p_values {
            let v = Scalar::from(*p);
            if !(v.is_finite() && v.norm() < 1.0) {
                return bad(format!("p = {v} must satisfy |p| < 1"));
            }
        }
        if !(self.pole_floor >= 0.0
            && self.condition_cap >= 1.0
            && self.min_pairwise_z_separation >= 0.0)
        {
            return bad(
                "pole_floor, min_pairwise_z_separation must be >= 0 and condition_cap >= 1".into(),
            );
        }
        if let Err(e) = TruncationPolicy::new(self.truncation.epsilon, self.truncation.max_terms) {
            return bad(e.to_string());
        }
        if self.max_resamples == 0 {
            return bad("max_resamples must be >= 1".into());
        }
        Ok(())
    }

    pub fn p_scalars(&self) -> Vec<Scalar> {
        self.p_values.iter().map(|&p| p.into()).collect()
    }
}

/// One cell of the verification grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: IdentityId,
    /// Number of variables; ignored by one-variable identities.
    pub n: usize,
    /// `N`; ignored by identities without an order.
    pub order: usize,
    /// Explicit box limits for box identities. When absent, the limits
    /// cycle through the compositions of `order` into `n` parts by trial.
    pub limits: Option<IndexVector>,
    pub p: Scalar,
}

impl Cell {
    pub fn new(id: IdentityId, n: usize, order: usize, p: Scalar) -> Self {
        Self {
            id,
            n,
            order,
            limits: None,
            p,
        }
    }

    pub fn arity(&self) -> Arity {
        self.id.entry().arity
    }

    /// Variable count actually used (0 for one-variable identities).
    pub fn effective_n(&self) -> usize {
        match self.arity() {
            Arity::OneVariable => 0,
            Arity::Box => self.limits.as_ref().map_or(self.n, IndexVector::len),
            _ => self.n,
        }
    }

    /// Order actually used (0 for identities without one).
    pub fn effective_order(&self) -> usize {
        match (self.arity(), &self.limits) {
            (Arity::Free, _) => 0,
            (Arity::Box, Some(l)) => l.total(),
            _ => self.order,
        }
    }

    /// Summation extent for a given trial.
    pub fn extent(&self, trial: u64) -> Extent {
        match self.arity() {
            Arity::Free => Extent::Free,
            Arity::Box => Extent::Box(match &self.limits {
                Some(l) => l.clone(),
                None => {
                    let all: Vec<_> = compositions_exact(self.order, self.n).collect();
                    all[(trial % all.len() as u64) as usize].clone()
                }
            }),
            _ => Extent::Terminating(self.order),
        }
    }
}

/// Optional parameter specializations applied before balancing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pin {
    /// `b = 1`.
    UnitB,
    /// `c = aq/b`.
    BcEqualsAq,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejections {
    pub pole: usize,
    pub magnitude: usize,
    pub condition: usize,
}

impl Rejections {
    pub fn total(&self) -> usize {
        self.pole + self.magnitude + self.condition
    }

    pub fn merge(&mut self, other: &Rejections) {
        self.pole += other.pole;
        self.magnitude += other.magnitude;
        self.condition += other.condition;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub instance: IdentityInstance,
    pub lhs: Evaluation,
    pub rhs: Evaluation,
    pub rejections: Rejections,
}

impl Sample {
    pub fn condition(&self) -> f64 {
        self.lhs.condition_ratio().max(self.rhs.condition_ratio())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("no admissible instance after {attempts} attempts")]
    Exhausted {
        attempts: usize,
        rejections: Rejections,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the generator for one trial of one cell.
pub fn trial_seed(seed: u64, cell: &Cell, trial: u64) -> u64 {
    let id_index = IdentityId::ALL.iter().position(|&i| i == cell.id).unwrap() as u64;
    let mut words = vec![
        id_index,
        cell.n as u64,
        cell.order as u64,
        cell.p.re.to_bits(),
        cell.p.im.to_bits(),
        trial,
    ];
    if let Some(l) = &cell.limits {
        words.push(u64::MAX);
        words.extend(l.entries().iter().map(|&v| v as u64));
    }
    words
        .into_iter()
        .fold(splitmix(seed), |h, w| splitmix(h ^ w))
}

fn log_uniform(rng: &mut ChaCha20Rng, (lo, hi): (f64, f64)) -> Scalar {
    let r = if lo == hi {
        lo
    } else {
        rng.gen_range(lo.ln()..hi.ln()).exp()
    };
    Scalar::from_polar(r, rng.gen_range(0.0..TAU))
}

fn is_singular(e: &IdentityError) -> bool {
    let theta_singular = |t: &ThetaError| {
        matches!(
            t,
            ThetaError::Pole { .. } | ThetaError::ZeroArgument | ThetaError::NonFinite
        )
    };
    match e {
        IdentityError::Pole { .. }
        | IdentityError::NonFinite { .. }
        | IdentityError::ZeroParam(_) => true,
        IdentityError::Theta(t) => theta_singular(t),
        IdentityError::Kernel(k) => match k {
            KernelError::Theta(t) => theta_singular(t),
            KernelError::CoincidentVariables { .. }
            | KernelError::ZeroVariable(_)
            | KernelError::Pole(_)
            | KernelError::DegenerateNodes => true,
            _ => false,
        },
        _ => false,
    }
}

/// Smallest relative distance of `r` from the zeros `p^k` (`|k| ≤ 4`) of theta.
fn zero_distance(r: Scalar, p: Scalar) -> f64 {
    let one = Scalar::new(1.0, 0.0);
    if p.norm() == 0.0 {
        return (r - one).norm();
    }
    (-4..=4)
        .map(|k| {
            let pk = crate::theta::int_pow(p, k);
            (r - pk).norm() / pk.norm()
        })
        .fold(f64::INFINITY, f64::min)
}

enum Attempt {
    Accepted(Box<Sample>),
    Pole,
    Magnitude,
    Condition,
}

fn attempt(
    cell: &Cell,
    extent: &Extent,
    pin: Option<Pin>,
    config: &SampleConfig,
    rng: &mut ChaCha20Rng,
) -> Result<Attempt, IdentityError> {
    let entry = cell.id.entry();
    let q = log_uniform(rng, config.q_range);
    let nome = Nome::with_truncation(cell.p, q, config.truncation)?;
    let n = cell.effective_n();
    let z: Vec<Scalar> = (0..n)
        .map(|_| log_uniform(rng, config.modulus_range))
        .collect();
    let gate_poles = config.pole_floor > 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if gate_poles && zero_distance(z[i] / z[j], cell.p) < config.min_pairwise_z_separation {
                return Ok(Attempt::Pole);
            }
        }
    }
    let mut partial: ParamMap = entry
        .free
        .iter()
        .map(|&p| (p, log_uniform(rng, config.modulus_range)))
        .collect();
    match pin {
        Some(Pin::UnitB) => {
            partial.insert(Param::B, Scalar::new(1.0, 0.0));
        }
        Some(Pin::BcEqualsAq) => {
            let c = partial[&Param::A] * q / partial[&Param::B];
            partial.insert(Param::C, c);
        }
        None => {}
    }
    let z = VariableVector::new(z)?;
    let instance =
        match IdentityInstance::solve_balancing(cell.id, &partial, z, extent.clone(), nome) {
            Ok(i) => i,
            Err(e) if is_singular(&e) => return Ok(Attempt::Pole),
            Err(e) => return Err(e),
        };
    let (lo, hi) = config.dependent_range;
    let mut derived: Vec<Scalar> = entry.dependents().map(|d| instance.param(d)).collect();
    derived.extend(instance.lambda);
    if derived.iter().any(|v| !(lo..=hi).contains(&v.norm())) {
        return Ok(Attempt::Magnitude);
    }
    let eval = |f: fn(&IdentityInstance) -> Result<Evaluation, IdentityError>| match f(&instance) {
        Ok(v) => Ok(Some(v)),
        Err(e) if is_singular(&e) => Ok(None),
        Err(e) => Err(e),
    };
    let (Some(lhs), Some(rhs)) = (eval(evaluate_lhs)?, eval(evaluate_rhs)?) else {
        return Ok(Attempt::Pole);
    };
    if lhs.min_denominator.min(rhs.min_denominator) < config.pole_floor {
        return Ok(Attempt::Pole);
    }
    if !(lhs.value.is_finite() && rhs.value.is_finite()) {
        return Ok(Attempt::Pole);
    }
    let sample = Sample {
        instance,
        lhs,
        rhs,
        rejections: Rejections::default(),
    };
    if !(sample.condition() <= config.condition_cap) {
        return Ok(Attempt::Condition);
    }
    Ok(Attempt::Accepted(Box::new(sample)))
}

/// Draws one admissible instance for `trial` of `cell`.
pub fn sample_instance(
    cell: &Cell,
    trial: u64,
    config: &SampleConfig,
) -> Result<Sample, SampleError> {
    sample_pinned(cell, trial, config, None)
}

/// As [`sample_instance`], with an optional parameter specialization.
pub fn sample_pinned(
    cell: &Cell,
    trial: u64,
    config: &SampleConfig,
    pin: Option<Pin>,
) -> Result<Sample, SampleError> {
    config.validate()?;
    if pin.is_some() && cell.id != IdentityId::BtTransform {
        return Err(
            IdentityError::Premise(format!("pins apply to bt-transform, not {}", cell.id)).into(),
        );
    }
    if cell.arity().has_variables() && cell.effective_n() == 0 {
        return Err(IdentityError::Shape {
            id: cell.id,
            reason: "at least one variable z_i is required".into(),
        }
        .into());
    }
    let extent = cell.extent(trial);
    let mut rng = ChaCha20Rng::seed_from_u64(trial_seed(config.seed, cell, trial));
    let mut rejections = Rejections::default();
    for _ in 0..config.max_resamples {
        match attempt(cell, &extent, pin, config, &mut rng)? {
            Attempt::Accepted(mut s) => {
                s.rejections = rejections;
                return Ok(*s);
            }
            Attempt::Pole => rejections.pole += 1,
            Attempt::Magnitude => rejections.magnitude += 1,
            Attempt::Condition => rejections.condition += 1,
        }
    }
    Err(SampleError::Exhausted {
        attempts: config.max_resamples,
        rejections,
    })
}

/// Rejection counts accumulated over `trials` consecutive trials of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub trials: usize,
    /// Instances drawn, accepted or not.
    pub attempts: usize,
    pub accepted: usize,
    pub exhausted: usize,
    pub rejections: Rejections,
}

pub fn rejection_report(
    cell: &Cell,
    config: &SampleConfig,
    trials: usize,
) -> Result<RejectionReport, SampleError> {
    let mut report = RejectionReport {
        trials,
        attempts: 0,
        accepted: 0,
        exhausted: 0,
        rejections: Rejections::default(),
    };
    for t in 0..trials as u64 {
        match sample_instance(cell, t, config) {
            Ok(s) => {
                report.accepted += 1;
                report.rejections.merge(&s.rejections);
            }
            Err(SampleError::Exhausted { rejections, .. }) => {
                report.exhausted += 1;
                report.rejections.merge(&rejections);
            }
            Err(e) => return Err(e),
        }
    }
    report.attempts = report.accepted + report.rejections.total();
    Ok(report)
}

impl RejectionReport {
    /// Fraction of drawn instances that passed every gate.
    pub fn pass_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempts as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::relative_error;

    #[test]
    fn same_seed_same_instance() {
        let cell = Cell::new(IdentityId::GrSum, 2, 2, Scalar::new(0.05, 0.0));
        let cfg = SampleConfig::default();
        let a = sample_instance(&cell, 3, &cfg).unwrap();
        let b = sample_instance(&cell, 3, &cfg).unwrap();
        assert_eq!(a.instance, b.instance);
        let c = sample_instance(&cell, 4, &cfg).unwrap();
        assert_ne!(a.instance, c.instance);
    }

    #[test]
    fn every_identity_balances_and_agrees() {
        let cfg = SampleConfig::default();
        for id in IdentityId::ALL {
            for p in cfg.p_scalars() {
                for trial in 0..3 {
                    let cell = Cell::new(id, 2, 2, p);
                    let s = sample_instance(&cell, trial, &cfg).unwrap();
                    assert!(s.instance.residual() <= 1e-12);
                    let err = relative_error(s.lhs.value, s.rhs.value);
                    assert!(err < 1e-8, "{id} p={p} trial {trial}: {err:e}");
                }
            }
        }
    }

    #[test]
    fn box_limits_cycle_through_compositions() {
        let cell = Cell::new(IdentityId::RsJackson, 2, 2, Scalar::new(0.0, 0.0));
        let seen: Vec<Extent> = (0..3).map(|t| cell.extent(t)).collect();
        assert_eq!(seen[0], Extent::Box(IndexVector(vec![2, 0])));
        assert_eq!(seen[1], Extent::Box(IndexVector(vec![1, 1])));
        assert_eq!(seen[2], Extent::Box(IndexVector(vec![0, 2])));
    }

    #[test]
    fn pins_apply() {
        let cfg = SampleConfig::default();
        let cell = Cell::new(IdentityId::BtTransform, 2, 2, Scalar::new(0.05, 0.0));
        let s = sample_pinned(&cell, 0, &cfg, Some(Pin::UnitB)).unwrap();
        assert_eq!(s.instance.param(Param::B), Scalar::new(1.0, 0.0));
        let s = sample_pinned(&cell, 0, &cfg, Some(Pin::BcEqualsAq)).unwrap();
        let i = &s.instance;
        assert!(
            relative_error(
                i.param(Param::A) * i.nome.q,
                i.param(Param::B) * i.param(Param::C)
            ) < 1e-14
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = SampleConfig::default();
        cfg.p_values.push(ComplexRecord { re: 1.0, im: 0.0 });
        assert!(cfg.validate().is_err());
        let cfg = SampleConfig {
            q_range: (0.0, 1.0),
            ..SampleConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}

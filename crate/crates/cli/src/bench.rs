//! Throughput of the left-hand sum with and without the shifted-factorial cache.

use std::time::{Duration, Instant};

use ellsum::identities::{evaluate_lhs_with, EvalOptions, IdentityId};
use ellsum::sampler::{sample_instance, Cell, SampleConfig};
use ellsum::Scalar;
use serde::{Deserialize, Serialize};

use crate::job::JobError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub id: IdentityId,
    pub n: usize,
    #[serde(rename = "N")]
    pub order: usize,
    pub terms: usize,
    pub repetitions: usize,
    pub memo_terms_per_second: f64,
    pub plain_terms_per_second: f64,
}

impl BenchRow {
    pub fn speedup(&self) -> f64 {
        self.memo_terms_per_second / self.plain_terms_per_second
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSettings {
    pub id: IdentityId,
    pub n: usize,
    pub orders: Vec<usize>,
    pub p: Scalar,
    /// Minimum timed duration per measurement.
    pub budget: Duration,
    pub sampler: SampleConfig,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            id: IdentityId::GrSum,
            n: 4,
            orders: (1..=8).collect(),
            p: Scalar::new(0.2, 0.0),
            budget: Duration::from_millis(200),
            sampler: SampleConfig::default(),
        }
    }
}

fn time_side(
    inst: &ellsum::IdentityInstance,
    memoize: bool,
    budget: Duration,
) -> Result<(usize, usize, Duration), JobError> {
    let opts = EvalOptions { memoize };
    let start = Instant::now();
    let mut reps = 0;
    let mut terms = 0;
    while reps == 0 || start.elapsed() < budget {
        let e = evaluate_lhs_with(inst, opts).map_err(|e| JobError::Invalid(e.to_string()))?;
        std::hint::black_box(e.value);
        terms = e.terms;
        reps += 1;
    }
    Ok((terms, reps, start.elapsed()))
}

pub fn run_bench(settings: &BenchSettings) -> Result<Vec<BenchRow>, JobError> {
    let mut rows = Vec::new();
    for &order in &settings.orders {
        let cell = Cell::new(settings.id, settings.n, order, settings.p);
        let sample = sample_instance(&cell, 0, &settings.sampler)
            .map_err(|e| JobError::Invalid(format!("{} N={order}: {e}", settings.id)))?;
        let (terms, plain_reps, plain) = time_side(&sample.instance, false, settings.budget)?;
        let (_, memo_reps, memo) = time_side(&sample.instance, true, settings.budget)?;
        let rate = |reps: usize, d: Duration| (terms * reps) as f64 / d.as_secs_f64();
        rows.push(BenchRow {
            id: settings.id,
            n: cell.effective_n(),
            order: cell.effective_order(),
            terms,
            repetitions: memo_reps.min(plain_reps),
            memo_terms_per_second: rate(memo_reps, memo),
            plain_terms_per_second: rate(plain_reps, plain),
        });
    }
    Ok(rows)
}

pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<16} {:>3} {:>3} {:>7} {:>14} {:>14} {:>8}\n",
        "identity", "n", "N", "terms", "memo terms/s", "plain terms/s", "speedup"
    );
    for r in rows {
        out += &format!(
            "{:<16} {:>3} {:>3} {:>7} {:>14.0} {:>14.0} {:>8.2}\n",
            r.id.as_str(),
            r.n,
            r.order,
            r.terms,
            r.memo_terms_per_second,
            r.plain_terms_per_second,
            r.speedup()
        );
    }
    out
}

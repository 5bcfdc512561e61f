//! Report types and their JSON / table renderings.

use std::fmt::Write as _;

use ellsum::record::{ComplexRecord, InstanceRecord};
use ellsum::sampler::Rejections;
use serde::{Deserialize, Serialize};

use crate::job::{CellKey, VerificationJob};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Pass,
    Fail,
    ResampleExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    #[serde(flatten)]
    pub cell: CellKey,
    pub trial: u64,
    pub status: TrialStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<ComplexRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<ComplexRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_ratio: Option<f64>,
    pub rejections: Rejections,
    /// Full parameter set, kept for failing trials so they can be replayed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    #[serde(flatten)]
    pub cell: CellKey,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub exhausted: usize,
    pub max_error: f64,
    pub median_error: f64,
    pub max_condition: f64,
    pub rejections: Rejections,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub cells: usize,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub exhausted: usize,
    pub max_error: f64,
}

/// Wall-clock data; excluded from the determinism contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub elapsed_seconds: f64,
    pub threads: usize,
    /// Per-trial wall time in microseconds, in the order of `trials`.
    pub trial_elapsed_us: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub job: VerificationJob,
    pub verdict: Verdict,
    pub totals: Totals,
    pub cells: Vec<CellSummary>,
    pub trials: Vec<TrialResult>,
    pub timing: Timing,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// JSON with the `timing` object removed, for determinism comparisons.
    pub fn to_json_without_timing(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("timing");
        }
        serde_json::to_string_pretty(&value).expect("report serializes") + "\n"
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<44} {:>6} {:>6} {:>6} {:>10} {:>10} {:>10} {:>6}",
            "cell", "trials", "pass", "fail", "max_err", "median", "max_cond", "rejct"
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:<44} {:>6} {:>6} {:>6} {:>10.2e} {:>10.2e} {:>10.2e} {:>6}",
                c.cell.to_string(),
                c.trials,
                c.passed,
                c.failed + c.exhausted,
                c.max_error,
                c.median_error,
                c.max_condition,
                c.rejections.total()
            );
        }
        for t in self.trials.iter().filter(|t| t.status != TrialStatus::Pass) {
            let _ = writeln!(
                out,
                "FAILED {} trial {}: {}",
                t.cell,
                t.trial,
                match (&t.relative_error, &t.diagnostic) {
                    (Some(e), _) => format!("relative error {e:.3e}"),
                    (None, Some(d)) => d.clone(),
                    (None, None) => "no result".into(),
                }
            );
        }
        let t = &self.totals;
        let _ = writeln!(
            out,
            "verdict: {} ({} trials in {} cells, {} passed, {} failed, {} exhausted, max error {:.3e}, tolerance {:.1e}, seed {})",
            match self.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
            },
            t.trials,
            t.cells,
            t.passed,
            t.failed,
            t.exhausted,
            t.max_error,
            self.job.tolerance,
            self.job.sampler.seed,
        );
        out
    }
}

/// Median of a slice of finite errors (0 when empty).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

pub fn summarize(cell: &CellKey, trials: &[TrialResult]) -> CellSummary {
    let errors: Vec<f64> = trials.iter().filter_map(|t| t.relative_error).collect();
    let mut rejections = Rejections::default();
    for t in trials {
        rejections.merge(&t.rejections);
    }
    let count = |s: TrialStatus| trials.iter().filter(|t| t.status == s).count();
    CellSummary {
        cell: cell.clone(),
        trials: trials.len(),
        passed: count(TrialStatus::Pass),
        failed: count(TrialStatus::Fail),
        exhausted: count(TrialStatus::ResampleExhausted),
        max_error: errors.iter().copied().fold(0.0, f64::max),
        median_error: median(&errors),
        max_condition: trials
            .iter()
            .filter_map(|t| t.condition_ratio)
            .fold(0.0, f64::max),
        rejections,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[]), 0.0);
    }
}

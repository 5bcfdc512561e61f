//! Job execution. Trials run in parallel; results are assembled in grid order.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use ellsum::identities::relative_error;
use ellsum::record::InstanceRecord;
use ellsum::sampler::{sample_instance, SampleError};
use rayon::prelude::*;

use crate::job::{CellKey, JobError, VerificationJob};
use crate::report::{
    summarize, Timing, ToolInfo, Totals, TrialResult, TrialStatus, Verdict, VerificationReport,
    SCHEMA_VERSION,
};

/// Environment variable holding the default number of worker threads.
pub const THREADS_ENV: &str = "ELLSUM_THREADS";

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

pub fn run_trial(
    cell: &CellKey,
    trial: u64,
    job: &VerificationJob,
) -> Result<TrialResult, JobError> {
    let base = TrialResult {
        cell: cell.clone(),
        trial,
        status: TrialStatus::ResampleExhausted,
        lhs: None,
        rhs: None,
        relative_error: None,
        condition_ratio: None,
        rejections: Default::default(),
        instance: None,
        diagnostic: None,
    };
    match sample_instance(&cell.cell(), trial, &job.sampler) {
        Ok(s) => {
            let err = relative_error(s.lhs.value, s.rhs.value);
            let err = if err.is_nan() { f64::INFINITY } else { err };
            let pass = err <= job.tolerance;
            Ok(TrialResult {
                status: if pass {
                    TrialStatus::Pass
                } else {
                    TrialStatus::Fail
                },
                lhs: Some(s.lhs.value.into()),
                rhs: Some(s.rhs.value.into()),
                relative_error: Some(err),
                condition_ratio: Some(s.condition()),
                rejections: s.rejections,
                instance: (!pass).then(|| InstanceRecord::from(&s.instance)),
                ..base
            })
        }
        Err(SampleError::Exhausted {
            attempts,
            rejections,
        }) => Ok(TrialResult {
            rejections,
            diagnostic: Some(format!(
                "no admissible instance in {attempts} draws (pole {}, magnitude {}, condition {})",
                rejections.pole, rejections.magnitude, rejections.condition
            )),
            ..base
        }),
        Err(e) => Err(JobError::Invalid(format!("{cell}: {e}"))),
    }
}

/// Runs every trial of every cell and assembles the report.
pub fn run_job(job: &VerificationJob) -> Result<VerificationReport, JobError> {
    run_job_with_threads(job, threads_from_env())
}

/// As [`run_job`] with an explicit worker count (`None` lets rayon decide).
pub fn run_job_with_threads(
    job: &VerificationJob,
    threads: Option<usize>,
) -> Result<VerificationReport, JobError> {
    job.validate()?;
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let clock = Instant::now();
    let cells = job.cells();
    let tasks: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..job.trials as u64).map(move |t| (c, t)))
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| JobError::Invalid(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<(TrialResult, u64), JobError>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, t)| {
                let tick = Instant::now();
                let r = run_trial(&cells[c], t, job)?;
                Ok((r, tick.elapsed().as_micros() as u64))
            })
            .collect()
    });
    let mut trials = Vec::with_capacity(outcomes.len());
    let mut elapsed = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let (r, us) = o?;
        trials.push(r);
        elapsed.push(us);
    }

    let summaries: Vec<_> = cells
        .iter()
        .zip(trials.chunks(job.trials))
        .map(|(cell, chunk)| summarize(cell, chunk))
        .collect();
    let count = |s: TrialStatus| trials.iter().filter(|t| t.status == s).count();
    let totals = Totals {
        cells: cells.len(),
        trials: trials.len(),
        passed: count(TrialStatus::Pass),
        failed: count(TrialStatus::Fail),
        exhausted: count(TrialStatus::ResampleExhausted),
        max_error: summaries.iter().map(|c| c.max_error).fold(0.0, f64::max),
    };
    let verdict = if totals.passed == totals.trials {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerificationReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo::default(),
        job: job.clone(),
        verdict,
        totals,
        cells: summaries,
        trials,
        timing: Timing {
            started_unix_ms: started,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
            threads: pool.current_num_threads(),
            trial_elapsed_us: elapsed,
        },
    })
}

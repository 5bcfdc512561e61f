//! Verification driver for the `ellsum` identity catalog.
//!
//! A [`job::VerificationJob`] describes a grid of identity cells; [`run::run_job`]
//! samples every trial, compares both sides and assembles a
//! [`report::VerificationReport`]. The `ellsum` binary wraps this in the
//! `verify`, `list`, `selftest` and `bench` subcommands.

pub mod bench;
pub mod cli;
pub mod job;
pub mod report;
pub mod run;

pub use job::{Format, IdentitySelection, VerificationJob};
pub use report::{TrialStatus, Verdict, VerificationReport};
pub use run::{run_job, run_job_with_threads};

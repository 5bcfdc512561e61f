//! Argument parsing and subcommand dispatch for the `ellsum` binary.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage,
//! configuration and I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use ellsum::identities::{catalog, Arity, IdentityId};
use ellsum::record::parse_complex;
use ellsum::selfcheck::all_suites;
use ellsum::{IndexVector, Scalar};
use serde::Serialize;

use crate::bench::{bench_table, run_bench, BenchSettings};
use crate::job::{Format, IdentitySelection, VerificationJob};
use crate::run::{run_job_with_threads, threads_from_env};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ellsum",
    version,
    about = "Randomized verification of elliptic hypergeometric identities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample instances over an identity grid and compare both sides.
    Verify(VerifyArgs),
    /// Print the identity catalog.
    List {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run the theta, shifted-factorial and kernel property suites.
    Selftest(SelftestArgs),
    /// Time the left-hand sum with and without the shifted-factorial cache.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Identity ids, comma separated, or `all`.
    #[arg(long, value_delimiter = ',')]
    pub identity: Vec<String>,
    /// Variable counts.
    #[arg(long = "n", value_delimiter = ',', allow_negative_numbers = true, value_parser = parse_count)]
    pub n: Vec<usize>,
    /// Orders `N`.
    #[arg(long = "N", value_delimiter = ',', allow_negative_numbers = true, value_parser = parse_count)]
    pub order: Vec<usize>,
    /// Box limits for rs-jackson, e.g. `--box 1,0,2`; repeatable.
    #[arg(long = "box", value_parser = parse_box)]
    pub boxes: Vec<IndexVector>,
    #[arg(long, allow_negative_numbers = true, value_parser = parse_count)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest relative error counted as a pass.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Elliptic nome, real or `re+imi`; repeatable or comma separated.
    #[arg(long = "p", value_delimiter = ',', allow_negative_numbers = true, value_parser = parse_nome)]
    pub p: Vec<Scalar>,
    /// Modulus range for q as `lo,hi`.
    #[arg(long = "q-range", value_parser = parse_range)]
    pub q_range: Option<(f64, f64)>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML job file; command-line flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default from ELLSUM_THREADS, else all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples per theta and shifted-factorial suite.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Samples per kernel suite.
    #[arg(long, default_value_t = 500)]
    pub kernel_samples: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "gr-sum")]
    pub identity: IdentityId,
    #[arg(long = "n", default_value_t = 4)]
    pub n: usize,
    /// Largest order; orders 1..=N are timed.
    #[arg(long = "max-N", default_value_t = 8)]
    pub max_order: usize,
    #[arg(long = "p", default_value = "0.2", value_parser = parse_nome)]
    pub p: Scalar,
    /// Minimum timed duration per measurement, in milliseconds.
    #[arg(long, default_value_t = 200)]
    pub budget_ms: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.trim()
        .parse::<i64>()
        .map_err(|_| format!("`{s}` is not an integer"))
        .and_then(|v| usize::try_from(v).map_err(|_| format!("`{s}` must be >= 0")))
}

fn parse_box(s: &str) -> Result<IndexVector, String> {
    s.split(',')
        .map(parse_count)
        .collect::<Result<Vec<_>, _>>()
        .map(IndexVector)
}

/// A nome with `|p| < 1`, real or complex.
pub fn parse_nome(s: &str) -> Result<Scalar, String> {
    let p = parse_complex(s)?;
    if !(p.is_finite() && p.norm() < 1.0) {
        return Err(format!("|p| must be < 1, got |{s}| = {}", p.norm()));
    }
    Ok(p)
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [lo, hi] = parts[..] else {
        return Err(format!("expected `lo,hi`, got `{s}`"));
    };
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{v}` is not a number"))
    };
    let (lo, hi) = (num(lo)?, num(hi)?);
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(format!("range needs 0 < lo <= hi, got ({lo}, {hi})"));
    }
    Ok((lo, hi))
}

fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

/// Builds the job from the optional config file and the flag overrides.
pub fn build_job(args: &VerifyArgs) -> Result<VerificationJob, String> {
    let mut job = match &args.config {
        Some(path) => VerificationJob::from_file(path).map_err(|e| e.to_string())?,
        None => VerificationJob::default(),
    };
    if !args.identity.is_empty() {
        job.identities = if args.identity.iter().any(|s| s == "all") {
            IdentitySelection::All
        } else {
            IdentitySelection::List(
                args.identity
                    .iter()
                    .map(|s| s.parse::<IdentityId>().map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?,
            )
        };
    }
    if !args.n.is_empty() {
        job.n_values = args.n.clone();
    }
    if !args.order.is_empty() {
        job.order_values = args.order.clone();
    }
    if !args.boxes.is_empty() {
        job.boxes = args.boxes.clone();
    }
    if let Some(t) = args.trials {
        job.trials = t;
    }
    if let Some(s) = args.seed {
        job.sampler.seed = s;
    }
    if let Some(t) = args.tol {
        job.tolerance = t;
    }
    if !args.p.is_empty() {
        job.sampler.p_values = args.p.iter().map(|&p| p.into()).collect();
    }
    if let Some(r) = args.q_range {
        job.sampler.q_range = r;
    }
    if let Some(f) = args.format {
        job.format = f;
    }
    job.validate().map_err(|e| e.to_string())?;
    Ok(job)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("io error writing {}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("io error writing standard output: {e}")),
    }
}

fn verify(args: &VerifyArgs) -> u8 {
    let job = match build_job(args) {
        Ok(j) => j,
        Err(e) => return usage(e),
    };
    let report = match run_job_with_threads(&job, args.threads.or_else(threads_from_env)) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    let text = match job.format {
        Format::Json => report.to_json(),
        Format::Table => report.to_table(),
    };
    if let Err(e) = emit(&text, args.out.as_ref()) {
        return usage(e);
    }
    if args.out.is_some() {
        eprintln!(
            "verdict: {} ({} of {} trials passed)",
            if report.passed() { "PASS" } else { "FAIL" },
            report.totals.passed,
            report.totals.trials
        );
    }
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

#[derive(Serialize)]
struct ListRow {
    id: IdentityId,
    title: &'static str,
    domain: &'static str,
    free: Vec<&'static str>,
    dependent: Vec<&'static str>,
    constraints: Vec<&'static str>,
    parity_branched: bool,
}

fn domain(a: Arity) -> &'static str {
    match a {
        Arity::OneVariable => "0 <= k <= N",
        Arity::Box => "0 <= x_i <= N_i",
        Arity::Free => "|x| = 1",
        Arity::Exact => "|x| = N",
        Arity::Bounded => "|x| <= N",
    }
}

pub fn list_text(format: Format) -> String {
    let rows: Vec<ListRow> = catalog()
        .iter()
        .map(|e| ListRow {
            id: e.id,
            title: e.title,
            domain: domain(e.arity),
            free: e.free.iter().map(|p| p.as_str()).collect(),
            dependent: e.dependents().map(|p| p.as_str()).collect(),
            constraints: e.constraints.iter().map(|c| c.display).collect(),
            parity_branched: e.parity_branched,
        })
        .collect();
    match format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("catalog serializes") + "\n",
        Format::Table => rows
            .iter()
            .map(|r| {
                format!(
                    "{:<16} {:<16} {:<36} {}\n",
                    r.id.as_str(),
                    r.domain,
                    r.constraints.join("; "),
                    r.title
                )
            })
            .collect(),
    }
}

fn selftest(args: &SelftestArgs) -> u8 {
    let outcomes = all_suites(args.seed, args.samples, args.kernel_samples);
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&outcomes).expect("outcomes serialize") + "\n",
        Format::Table => outcomes
            .iter()
            .map(|o| {
                format!(
                    "{:<4} {:<32} samples {:>5}  max error {:.3e}  tolerance {:.0e}\n",
                    if o.passed { "ok" } else { "FAIL" },
                    o.name,
                    o.samples,
                    o.max_error,
                    o.tolerance
                )
            })
            .collect(),
    };
    if let Err(e) = emit(&text, None) {
        return usage(e);
    }
    if outcomes.iter().all(|o| o.passed) {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn bench(args: &BenchArgs) -> u8 {
    if args.max_order == 0 {
        return usage("--max-N must be >= 1");
    }
    let mut settings = BenchSettings {
        id: args.identity,
        n: args.n,
        orders: (1..=args.max_order).collect(),
        p: args.p,
        budget: Duration::from_millis(args.budget_ms),
        ..BenchSettings::default()
    };
    settings.sampler.seed = args.seed;
    let rows = match run_bench(&settings) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
        Format::Table => bench_table(&rows),
    };
    match emit(&text, None) {
        Ok(()) => EXIT_PASS,
        Err(e) => usage(e),
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    match &cli.command {
        Command::Verify(a) => verify(a),
        Command::List { format } => match emit(&list_text(*format), None) {
            Ok(()) => EXIT_PASS,
            Err(e) => usage(e),
        },
        Command::Selftest(a) => selftest(a),
        Command::Bench(a) => bench(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nome_parsing() {
        assert_eq!(parse_nome("0.2").unwrap(), Scalar::new(0.2, 0.0));
        assert_eq!(parse_nome("0.1+0.2i").unwrap(), Scalar::new(0.1, 0.2));
        assert!(parse_nome("1").is_err());
        assert!(parse_nome("0.8+0.8i").is_err());
    }

    #[test]
    fn counts_reject_negatives() {
        assert_eq!(parse_count("3"), Ok(3));
        assert!(parse_count("-1").is_err());
        assert!(parse_range("0.5,0.2").is_err());
        assert_eq!(parse_range("0.2,1.5"), Ok((0.2, 1.5)));
    }

    #[test]
    fn list_has_every_identity() {
        assert_eq!(
            list_text(Format::Table).lines().count(),
            IdentityId::ALL.len()
        );
    }
}

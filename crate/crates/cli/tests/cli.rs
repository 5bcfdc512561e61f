use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::Duration;

use ellsum::identities::IdentityId;
use ellsum_cli::bench::{run_bench, BenchSettings};
use ellsum_cli::report::TrialStatus;
use ellsum_cli::{run_job, IdentitySelection, VerificationJob};

fn ellsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellsum"))
        .args(args)
        .env("ELLSUM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ellsum-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn list_prints_eleven_entries() {
    let out = ellsum(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 11);
    let json = ellsum(&["list", "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 11);
}

#[test]
fn theta_lemma_run_passes() {
    let out = ellsum(&[
        "verify",
        "--identity",
        "theta-lemma",
        "--n",
        "5",
        "--trials",
        "50",
        "--seed",
        "7",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["job"]["sampler"]["seed"], 7);
    assert_eq!(report["trials"].as_array().unwrap().len(), 150);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["verify", "--identity", "gr-sum", "--N", "-1"],
        vec!["verify", "--identity", "no-such-identity"],
        vec!["verify", "--p", "1.2"],
        vec!["verify", "--trials", "0"],
        vec!["verify", "--q-range", "2,1"],
        vec!["verify", "--config", "/nonexistent/job.toml"],
        vec!["frobnicate"],
    ] {
        assert_eq!(ellsum(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn zero_tolerance_fails() {
    let out = ellsum(&[
        "verify",
        "--identity",
        "gr-sum",
        "--n",
        "2",
        "--N",
        "3",
        "--trials",
        "3",
        "--tol",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "fail");
    let failing = &report["trials"][0];
    assert!(failing["instance"]["params"]["b4"]["re"].is_number());
}

#[test]
fn config_file_and_out_flag() {
    let config = scratch("job.toml");
    std::fs::write(
        &config,
        "identities = [\"rs-jackson\"]\nboxes = [[1, 2], [0, 1, 1]]\ntrials = 2\nformat = \"table\"\n[sampler]\nseed = 5\np_values = [\"0.1+0.05i\"]\n",
    )
    .unwrap();
    let out_path = scratch("report.txt");
    let out = ellsum(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = std::fs::read_to_string(&out_path).unwrap();
    assert!(table.contains("rs-jackson n=2 box=[1, 2]"), "{table}");
    assert!(table.contains("verdict: PASS"));

    let bad = scratch("bad.toml");
    std::fs::write(&bad, "trials = \"many\"\n").unwrap();
    assert_eq!(
        ellsum(&["verify", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let unwritable = ellsum(&[
        "verify",
        "--identity",
        "theta-lemma",
        "--n",
        "1",
        "--trials",
        "1",
        "--out",
        "/nonexistent/dir/r.json",
    ]);
    assert_eq!(unwritable.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unwritable.stderr).contains("io error"));
}

#[test]
fn selftest_passes() {
    let out = ellsum(&["selftest", "--samples", "200", "--kernel-samples", "100"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 9);
}

#[test]
fn order_zero_jobs_give_one() {
    let job = VerificationJob {
        order_values: vec![0],
        trials: 1,
        ..VerificationJob::default()
    };
    let report = run_job(&job).unwrap();
    assert!(report.passed());
    for t in report.trials.iter().filter(|t| t.cell.order == Some(0)) {
        let lhs = t.lhs.unwrap();
        assert!(
            (lhs.re - 1.0).abs() < 1e-14 && lhs.im.abs() < 1e-14,
            "{t:?}"
        );
        assert!(t.relative_error.unwrap() < 1e-14);
    }
}

#[test]
fn gr_sum_grid_with_seed_42() {
    let mut job = VerificationJob {
        identities: IdentitySelection::List(vec![IdentityId::GrSum]),
        ..VerificationJob::default()
    };
    job.sampler.seed = 42;
    let report = run_job(&job).unwrap();
    assert!(report.passed(), "max error {:e}", report.totals.max_error);
    assert_eq!(report.totals.trials, 4 * 5 * 3 * 25);
    assert!(report.trials.iter().all(|t| t.status == TrialStatus::Pass));
    for c in &report.cells {
        assert!(c.median_error <= c.max_error);
    }
}

#[test]
fn memoization_does_not_slow_the_sum() {
    let rows = run_bench(&BenchSettings {
        orders: vec![8],
        budget: Duration::from_millis(300),
        ..BenchSettings::default()
    })
    .unwrap();
    assert_eq!(rows[0].terms, 165);
    assert!(rows[0].speedup() >= 1.0, "{:?}", rows[0]);
}

//! End-to-end tests of the `diffmin` binary: flags, file outputs, and the
//! exit-code contract.

mod common;

use common::{cli_binary, fixture};
use diffmin::{levenshtein, ByteInput};
use std::path::PathBuf;
use std::process::{Command, Output};

struct Workdir {
    dir: tempfile::TempDir,
}

impl Workdir {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, contents: &[u8]) -> PathBuf {
        let path = self.dir.path().join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).unwrap();
        }
        std::fs::write(&path, contents).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(cli_binary())
        .args(args)
        .output()
        .expect("spawn diffmin binary")
}

fn file_target_arg(name: &str) -> String {
    format!("{} @@", fixture(name).display())
}

fn stdout_str(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_str(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("binary not killed by signal")
}

// ---------------------------------------------------------------------------
// minimize
// ---------------------------------------------------------------------------

#[test]
fn minimize_writes_refined_input_and_trace() {
    let w = Workdir::new();
    let crash = w.file("crash.bin", b"HxEjunkADER payBUGload");
    let pass = w.file("pass.bin", b"HEADER payload");
    let out = w.path("refined.bin");

    let output = run_cli(&[
        "minimize",
        "--target",
        &file_target_arg("crash_substring"),
        "--crash",
        crash.to_str().unwrap(),
        "--pass",
        pass.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));
    assert_eq!(std::fs::read(&out).unwrap(), b"HEADER payBUGload");
    assert!(stdout_str(&output).contains("distance 8 -> 3"));

    let trace_path = w.path("refined.bin.trace.jsonl");
    let trace_text = std::fs::read_to_string(&trace_path).unwrap();
    let lines: Vec<serde_json::Value> = trace_text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines.len() >= 2);
    let summary = lines.last().unwrap();
    assert_eq!(summary["finalInput"], hex::encode(b"HEADER payBUGload"));
    assert_eq!(summary["truncated"], false);
    assert_eq!(summary["referenceFingerprint"]["signal"], libc::SIGSEGV);
    // Iteration lines carry the documented fields.
    assert!(lines[0]["iterationIndex"].is_number());
    assert!(lines[0]["distanceBefore"].is_number());
    assert!(lines[0]["editsConsidered"].is_number());
}

#[test]
fn minimize_rejects_non_crashing_crash_input_with_exit_2() {
    let w = Workdir::new();
    let crash = w.file("crash.bin", b"totally fine");
    let pass = w.file("pass.bin", b"fine");
    let output = run_cli(&[
        "minimize",
        "--target",
        &file_target_arg("crash_substring"),
        "--crash",
        crash.to_str().unwrap(),
        "--pass",
        pass.to_str().unwrap(),
        "--out",
        w.path("out.bin").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_str(&output).contains("crashing input did not crash"));
}

#[test]
fn minimize_budget_truncation_exits_4_with_partial_output() {
    let w = Workdir::new();
    let crash = w.file("crash.bin", b"aXXaBUGbYYb");
    let pass = w.file("pass.bin", b"aabb");
    let out = w.path("out.bin");
    let output = run_cli(&[
        "minimize",
        "--target",
        &file_target_arg("crash_substring"),
        "--crash",
        crash.to_str().unwrap(),
        "--pass",
        pass.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--max-execs",
        "1",
    ]);
    assert_eq!(exit_code(&output), 4, "stderr: {}", stderr_str(&output));
    let refined = ByteInput::new(std::fs::read(&out).unwrap());
    let passing = ByteInput::from("aabb");
    let dist = levenshtein(&passing, &refined);
    let original = levenshtein(&passing, &ByteInput::from("aXXaBUGbYYb"));
    assert!(dist > 0 && dist < original);
}

#[test]
fn minimize_nondeterministic_target_exits_3() {
    let w = Workdir::new();
    let crash = w.file("crash.bin", b"whatever");
    let pass = w.file("pass.bin", b"whatever2");
    let state = w.path("state");
    let output = Command::new(cli_binary())
        .args([
            "minimize",
            "--target",
            &fixture("nondet").display().to_string(),
            "--crash",
            crash.to_str().unwrap(),
            "--pass",
            pass.to_str().unwrap(),
            "--out",
            w.path("out.bin").to_str().unwrap(),
        ])
        .env("NONDET_STATE", &state)
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 3, "stderr: {}", stderr_str(&output));
    assert!(stderr_str(&output).contains("nondeterministic"));
}

#[test]
fn minimize_refuses_to_clobber_inputs() {
    let w = Workdir::new();
    let crash = w.file("crash.bin", b"BUG");
    let pass = w.file("pass.bin", b"ok");
    let output = run_cli(&[
        "minimize",
        "--target",
        &file_target_arg("crash_substring"),
        "--crash",
        crash.to_str().unwrap(),
        "--pass",
        pass.to_str().unwrap(),
        "--out",
        crash.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_str(&output).contains("clobber"));
    assert_eq!(std::fs::read(&crash).unwrap(), b"BUG");
}

// ---------------------------------------------------------------------------
// ddmin
// ---------------------------------------------------------------------------

#[test]
fn ddmin_minimizes_to_the_trigger() {
    let w = Workdir::new();
    let crash = w.file("crash.bin", b"aaaaBUGbbbb");
    let out = w.path("min.bin");
    let output = run_cli(&[
        "ddmin",
        "--target",
        &file_target_arg("crash_substring"),
        "--crash",
        crash.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));
    assert_eq!(std::fs::read(&out).unwrap(), b"BUG");
    assert!(stdout_str(&output).contains("1-minimal verified: yes"));
}

#[test]
fn ddmin_non_crashing_input_exits_2() {
    let w = Workdir::new();
    let crash = w.file("crash.bin", b"nothing here");
    let output = run_cli(&[
        "ddmin",
        "--target",
        &file_target_arg("crash_substring"),
        "--crash",
        crash.to_str().unwrap(),
        "--out",
        w.path("min.bin").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
}

// ---------------------------------------------------------------------------
// distance
// ---------------------------------------------------------------------------

#[test]
fn distance_of_identical_files_is_zero() {
    let w = Workdir::new();
    let a = w.file("a.bin", b"same bytes");
    let b = w.file("b.bin", b"same bytes");
    let output = run_cli(&["distance", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 0);
    let json_line = stdout_str(&output)
        .lines()
        .find(|l| l.starts_with('{'))
        .unwrap()
        .to_string();
    let value: serde_json::Value = serde_json::from_str(&json_line).unwrap();
    assert_eq!(value["distance"], 0);
}

#[test]
fn distance_three_file_report() {
    let w = Workdir::new();
    let pass = w.file("pass.bin", b"HEADER payload");
    let crash = w.file("crash.bin", b"HxEjunkADER payBUGload");
    let refined = w.file("refined.bin", b"HEADER payBUGload");
    let output = run_cli(&[
        "distance",
        pass.to_str().unwrap(),
        crash.to_str().unwrap(),
        refined.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    let json_line = stdout_str(&output)
        .lines()
        .find(|l| l.starts_with('{'))
        .unwrap()
        .to_string();
    let value: serde_json::Value = serde_json::from_str(&json_line).unwrap();
    assert_eq!(value["distOriginal"], 8);
    assert_eq!(value["distRefined"], 3);
}

#[test]
fn distance_seed_directory_prints_min_avg_max() {
    let w = Workdir::new();
    w.file("seeds/s1", b"HEADER payload");
    w.file("seeds/s2", b"HEADER");
    w.file("seeds/s3", b"payload");
    let crash = w.file("crash.bin", b"HEADER payBUGload");
    let output = run_cli(&[
        "distance",
        w.path("seeds").to_str().unwrap(),
        crash.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));
    let text = stdout_str(&output);
    assert!(text.contains("min\t"));
    assert!(text.contains("avg\t"));
    assert!(text.contains("max\t"));
    let json_line = text.lines().find(|l| l.starts_with('{')).unwrap();
    let value: serde_json::Value = serde_json::from_str(json_line).unwrap();
    assert_eq!(value["seeds"], 3);
}

#[test]
fn distance_unreadable_file_exits_1() {
    let w = Workdir::new();
    let a = w.file("a.bin", b"x");
    let output = run_cli(&[
        "distance",
        a.to_str().unwrap(),
        w.path("missing.bin").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
}

// ---------------------------------------------------------------------------
// sbfl
// ---------------------------------------------------------------------------

fn write_manifest(w: &Workdir, dir: &str, with_map: bool) -> PathBuf {
    w.file(&format!("{dir}/fail.cov"), b"a.c:1\na.c:2\n");
    w.file(&format!("{dir}/pass.cov"), b"a.c:2\n");
    let map_field = if with_map {
        w.file(&format!("{dir}/funcs.map"), b"a.c:1\tmain\na.c:2\thelper\n");
        ",\n  \"functionMap\": \"funcs.map\""
    } else {
        ""
    };
    w.file(
        &format!("{dir}/manifest.json"),
        format!(
            r#"{{
  "tests": [
    {{"id": "t-fail", "verdict": "fail", "coverageFile": "fail.cov"}},
    {{"id": "t-pass", "verdict": "pass", "coverageFile": "pass.cov"}}
  ]{map_field}
}}"#
        )
        .as_bytes(),
    )
}

#[test]
fn sbfl_ranks_the_failing_only_element_first() {
    let w = Workdir::new();
    let manifest = write_manifest(&w, "m", false);
    let output = run_cli(&[
        "sbfl",
        "--manifest",
        manifest.to_str().unwrap(),
        "--granularity",
        "statement",
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));
    let text = stdout_str(&output);
    let first_entry = text.lines().nth(1).unwrap();
    assert!(first_entry.starts_with("a.c:1\t"), "{first_entry:?}");
}

#[test]
fn sbfl_function_granularity_without_map_exits_2() {
    let w = Workdir::new();
    let manifest = write_manifest(&w, "m", false);
    let output = run_cli(&[
        "sbfl",
        "--manifest",
        manifest.to_str().unwrap(),
        "--granularity",
        "function",
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_str(&output).contains("function map"));
}

#[test]
fn sbfl_schema_violation_names_the_field() {
    let w = Workdir::new();
    let manifest = w.file("bad/manifest.json", br#"{"tests": [], "bogusField": true}"#);
    let output = run_cli(&["sbfl", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_str(&output).contains("bogusField"));
}

#[test]
fn sbfl_compare_identical_manifests_reports_identical_ranks() {
    let w = Workdir::new();
    let m1 = write_manifest(&w, "m1", true);
    let m2 = write_manifest(&w, "m2", true);
    let m3 = write_manifest(&w, "m3", true);
    let buggy = w.file("buggy.txt", b"a.c:1\n");
    let output = run_cli(&[
        "sbfl",
        "--buggy",
        buggy.to_str().unwrap(),
        "--compare",
        m1.to_str().unwrap(),
        m2.to_str().unwrap(),
        m3.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));
    let text = stdout_str(&output);
    assert!(text.contains("fuzz\t1\t1"));
    assert!(text.contains("ddmin\t1\t1"));
    assert!(text.contains("diffmin\t1\t1"));
}

#[test]
fn sbfl_compare_without_buggy_exits_2() {
    let w = Workdir::new();
    let m1 = write_manifest(&w, "m1", true);
    let m2 = write_manifest(&w, "m2", true);
    let m3 = write_manifest(&w, "m3", true);
    let output = run_cli(&[
        "sbfl",
        "--compare",
        m1.to_str().unwrap(),
        m2.to_str().unwrap(),
        m3.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn sbfl_json_format_is_parseable() {
    let w = Workdir::new();
    let manifest = write_manifest(&w, "m", false);
    let output = run_cli(&[
        "sbfl",
        "--manifest",
        manifest.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(exit_code(&output), 0);
    let value: serde_json::Value =
        serde_json::from_str(stdout_str(&output).lines().next().unwrap()).unwrap();
    assert_eq!(value["formula"], "op2");
    assert_eq!(value["entries"][0]["element"], "a.c:1");
}

// ---------------------------------------------------------------------------
// batch
// ---------------------------------------------------------------------------

#[test]
fn batch_refines_against_every_seed() {
    let w = Workdir::new();
    let crash = w.file("crash.bin", b"HxEjunkADER payBUGload");
    w.file("seeds/ideal", b"HEADER payload");
    w.file("seeds/loose", b"HEADER things");
    w.file("seeds/other", b"unrelated bytes");
    let out_dir = w.path("out");
    let output = run_cli(&[
        "batch",
        "--target",
        &file_target_arg("crash_substring"),
        "--crash",
        crash.to_str().unwrap(),
        "--seeds",
        w.path("seeds").to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));

    for seed in ["ideal", "loose", "other"] {
        assert!(out_dir.join(format!("{seed}.refined")).is_file());
        assert!(out_dir.join(format!("{seed}.trace.jsonl")).is_file());
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["rows"].as_array().unwrap().len(), 3);

    // The seed matching the crash's passing variant attains the minimum
    // refined distance.
    let rows = summary["rows"].as_array().unwrap();
    let ideal_row = rows.iter().find(|r| r["seed"] == "ideal").unwrap();
    let min_refined = summary["distRefined"]["min"].as_u64().unwrap();
    assert_eq!(ideal_row["distRefined"].as_u64().unwrap(), min_refined);
    assert_eq!(ideal_row["distRefined"].as_u64().unwrap(), 3);
}

#[test]
fn batch_empty_seed_directory_exits_2() {
    let w = Workdir::new();
    let crash = w.file("crash.bin", b"BUG");
    std::fs::create_dir_all(w.path("seeds")).unwrap();
    let output = run_cli(&[
        "batch",
        "--target",
        &file_target_arg("crash_substring"),
        "--crash",
        crash.to_str().unwrap(),
        "--seeds",
        w.path("seeds").to_str().unwrap(),
        "--out-dir",
        w.path("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
}

// ---------------------------------------------------------------------------
// misc
// ---------------------------------------------------------------------------

#[test]
fn env_variable_overrides_timeout() {
    // A sleeper with a large CLI-side default would hang; the env override
    // shrinks the timeout so classification fails fast with exit 2 (the
    // "crashing" input hangs rather than crashes).
    let w = Workdir::new();
    let crash = w.file("crash.bin", b"x");
    let pass = w.file("pass.bin", b"y");
    let started = std::time::Instant::now();
    let output = Command::new(cli_binary())
        .args([
            "minimize",
            "--target",
            &fixture("sleeper").display().to_string(),
            "--crash",
            crash.to_str().unwrap(),
            "--pass",
            pass.to_str().unwrap(),
            "--out",
            w.path("out.bin").to_str().unwrap(),
        ])
        .env("DIFFMIN_TIMEOUT_MS", "120")
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 2);
    assert!(started.elapsed() < std::time::Duration::from_secs(5));
    assert!(stderr_str(&output).contains("Hang"));
}

#[test]
fn sigint_flushes_trace_and_exits_130() {
    // A deliberately slow target (200 ms per run) keeps the minimizer busy
    // long enough to interrupt it mid-flight.
    let w = Workdir::new();
    let script = w.file(
        "slow_crash.sh",
        b"#!/bin/sh\nsleep 0.2\ngrep -q BUG \"$1\" && kill -SEGV $$\nexit 0\n",
    );
    let mut perms = std::fs::metadata(&script).unwrap().permissions();
    std::os::unix::fs::PermissionsExt::set_mode(&mut perms, 0o755);
    std::fs::set_permissions(&script, perms).unwrap();

    let crash = w.file("crash.bin", b"A xxBUGxx B yy C zz D ww E");
    let pass = w.file("pass.bin", b"A B C D E");
    let out = w.path("out.bin");
    let trace = w.path("out.bin.trace.jsonl");

    let child = Command::new(cli_binary())
        .args([
            "minimize",
            "--target",
            &format!("{} @@", script.display()),
            "--crash",
            crash.to_str().unwrap(),
            "--pass",
            pass.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();

    std::thread::sleep(std::time::Duration::from_millis(1200));
    unsafe {
        libc::kill(child.id() as i32, libc::SIGINT);
    }
    let output = child.wait_with_output().unwrap();
    assert_eq!(output.status.code(), Some(130), "stderr: {}",
        String::from_utf8_lossy(&output.stderr));

    // Partial results are flushed: refined-so-far plus a truncated trace.
    assert!(out.is_file());
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    let last: serde_json::Value =
        serde_json::from_str(trace_text.lines().last().unwrap()).unwrap();
    assert_eq!(last["truncated"], true);
    assert_eq!(last["truncationReason"], "interrupted");
}

#[test]
fn help_lists_all_subcommands() {
    let output = run_cli(&["--help"]);
    let text = stdout_str(&output);
    for sub in ["minimize", "ddmin", "distance", "sbfl", "batch"] {
        assert!(text.contains(sub), "help missing {sub}");
    }
}

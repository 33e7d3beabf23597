//! Running the program under test and classifying the outcome.
//!
//! A [`TargetSpec`] describes how to invoke the target: an argv template
//! where the `@@` token stands for a temp file holding the input (absent
//! `@@`, the input is piped to stdin — the fuzzer-community convention), a
//! timeout, environment overrides, and the crash oracle. Two oracles are
//! supported and may be combined: a set of crash signals, and a pattern
//! matched against captured stderr for canary-style targets.
//!
//! [`execute`] is safe to call concurrently; every call materializes its own
//! temp file and owns its child process.

use crate::input::ByteInput;
use regex::bytes::Regex;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Placeholder token replaced by the input file path.
pub const INPUT_PLACEHOLDER: &str = "@@";

/// Captured stderr is truncated to this many bytes.
pub const STDERR_CAPTURE_CAP: usize = 1 << 20;

/// Signals treated as crashes unless overridden: SIGILL, SIGABRT, SIGBUS,
/// SIGFPE, SIGSEGV.
pub fn default_crash_signals() -> BTreeSet<i32> {
    [
        libc::SIGILL,
        libc::SIGABRT,
        libc::SIGBUS,
        libc::SIGFPE,
        libc::SIGSEGV,
    ]
    .into_iter()
    .collect()
}

#[derive(Debug, Error)]
pub enum TargetSpecError {
    #[error("command template is empty")]
    EmptyCommand,
    #[error("command template contains more than one {INPUT_PLACEHOLDER} placeholder")]
    MultiplePlaceholders,
    #[error("timeout must be at least 1 millisecond")]
    ZeroTimeout,
    #[error("invalid crash token pattern: {0}")]
    BadPattern(#[from] regex::Error),
}

/// How to run the program under test.
#[derive(Debug, Clone)]
pub struct TargetSpec {
    command: Vec<String>,
    timeout: Duration,
    env: BTreeMap<String, String>,
    crash_token_pattern: Option<Regex>,
    working_dir: Option<PathBuf>,
    crash_signals: BTreeSet<i32>,
}

impl TargetSpec {
    /// Builds a spec with the default 1000 ms timeout and default crash
    /// signal set.
    pub fn new(command: Vec<String>) -> Result<Self, TargetSpecError> {
        if command.is_empty() {
            return Err(TargetSpecError::EmptyCommand);
        }
        let placeholders = command
            .iter()
            .filter(|arg| arg.contains(INPUT_PLACEHOLDER))
            .count();
        if placeholders > 1 {
            return Err(TargetSpecError::MultiplePlaceholders);
        }
        Ok(Self {
            command,
            timeout: Duration::from_millis(1000),
            env: BTreeMap::new(),
            crash_token_pattern: None,
            working_dir: None,
            crash_signals: default_crash_signals(),
        })
    }

    pub fn with_timeout_millis(mut self, millis: u64) -> Result<Self, TargetSpecError> {
        if millis == 0 {
            return Err(TargetSpecError::ZeroTimeout);
        }
        self.timeout = Duration::from_millis(millis);
        Ok(self)
    }

    pub fn with_env(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.env.insert(key.into(), value.into());
        self
    }

    pub fn with_crash_token(mut self, pattern: &str) -> Result<Self, TargetSpecError> {
        self.crash_token_pattern = Some(Regex::new(pattern)?);
        Ok(self)
    }

    pub fn with_working_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.working_dir = Some(dir.into());
        self
    }

    pub fn with_crash_signals(mut self, signals: impl IntoIterator<Item = i32>) -> Self {
        self.crash_signals = signals.into_iter().collect();
        self
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn command(&self) -> &[String] {
        &self.command
    }

    fn uses_file_input(&self) -> bool {
        self.command
            .iter()
            .any(|arg| arg.contains(INPUT_PLACEHOLDER))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum OutcomeKind {
    /// Terminated within budget without meeting any crash condition.
    Pass,
    /// Terminated by a configured crash signal, or the crash token matched.
    Crash,
    /// Exceeded the timeout and was forcibly terminated.
    Hang,
    /// The target could not be launched.
    SetupError,
}

/// Classification of one target run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionOutcome {
    pub kind: OutcomeKind,
    pub exit_code: Option<i32>,
    pub signal: Option<i32>,
    pub matched_token: Option<String>,
    pub duration_millis: u64,
    /// SHA-256 of captured stderr; diagnostics only.
    pub stderr_digest: String,
    /// Human-readable detail, present only for `SetupError`.
    pub setup_error: Option<String>,
}

impl ExecutionOutcome {
    /// The crash equality key; `None` unless this outcome is a crash.
    pub fn fingerprint(&self) -> Option<CrashFingerprint> {
        if self.kind != OutcomeKind::Crash {
            return None;
        }
        Some(CrashFingerprint {
            signal: self.signal,
            matched_token: self.matched_token.clone(),
            // The exit code only discriminates token-classified crashes that
            // terminated normally.
            exit_code: if self.signal.is_none() {
                self.exit_code
            } else {
                None
            },
        })
    }
}

/// Equality key identifying "the same crash": signal and/or canary token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CrashFingerprint {
    pub signal: Option<i32>,
    pub matched_token: Option<String>,
    pub exit_code: Option<i32>,
}

/// True iff both outcomes crashed with equal fingerprints. Pass, Hang, and
/// SetupError outcomes never compare equal to anything.
pub fn same_crash(a: &ExecutionOutcome, b: &ExecutionOutcome) -> bool {
    match (a.fingerprint(), b.fingerprint()) {
        (Some(fa), Some(fb)) => fa == fb,
        _ => false,
    }
}

/// Runs the target on one input and classifies the result.
pub fn execute(target: &TargetSpec, input: &ByteInput) -> ExecutionOutcome {
    let started = Instant::now();
    match run_once(target, input) {
        Ok(outcome) => outcome,
        Err(detail) => ExecutionOutcome {
            kind: OutcomeKind::SetupError,
            exit_code: None,
            signal: None,
            matched_token: None,
            duration_millis: started.elapsed().as_millis() as u64,
            stderr_digest: hex_digest(&[]),
            setup_error: Some(detail),
        },
    }
}

fn run_once(target: &TargetSpec, input: &ByteInput) -> Result<ExecutionOutcome, String> {
    let started = Instant::now();

    // Materialize the input. The temp file lives until this function returns.
    let temp_file = if target.uses_file_input() {
        let mut file = tempfile::Builder::new()
            .prefix("diffmin-input-")
            .tempfile()
            .map_err(|e| format!("cannot create temp input file: {e}"))?;
        file.write_all(input.as_slice())
            .and_then(|_| file.flush())
            .map_err(|e| format!("cannot write temp input file: {e}"))?;
        Some(file)
    } else {
        None
    };

    let mut argv = target.command.to_vec();
    if let Some(file) = &temp_file {
        let path = file.path().to_string_lossy().into_owned();
        for arg in &mut argv {
            if arg.contains(INPUT_PLACEHOLDER) {
                *arg = arg.replace(INPUT_PLACEHOLDER, &path);
            }
        }
    }

    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .stdin(if temp_file.is_some() {
            Stdio::null()
        } else {
            Stdio::piped()
        })
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .envs(&target.env);
    if let Some(dir) = &target.working_dir {
        cmd.current_dir(dir);
    }
    // Own process group so a timeout kill takes the whole tree down.
    std::os::unix::process::CommandExt::process_group(&mut cmd, 0);

    let mut child = cmd
        .spawn()
        .map_err(|e| format!("cannot launch {:?}: {e}", argv[0]))?;

    let stdin_writer = child.stdin.take().map(|mut stdin| {
        let bytes = input.clone();
        std::thread::spawn(move || {
            // The target may exit without reading; a broken pipe is fine.
            let _ = stdin.write_all(bytes.as_slice());
        })
    });

    let stderr_reader = child.stderr.take().map(|mut stderr| {
        std::thread::spawn(move || {
            let mut captured = Vec::new();
            let _ = (&mut stderr)
                .take(STDERR_CAPTURE_CAP as u64)
                .read_to_end(&mut captured);
            // Drain anything past the cap so the child never blocks on a
            // full pipe.
            let _ = std::io::copy(&mut stderr, &mut std::io::sink());
            captured
        })
    });

    let deadline = started + target.timeout;
    let mut timed_out = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) => {
                if Instant::now() >= deadline {
                    kill_process_group(&mut child);
                    let _ = child.wait();
                    timed_out = true;
                    break None;
                }
                std::thread::sleep(Duration::from_millis(1));
            }
            Err(e) => return Err(format!("wait failed: {e}")),
        }
    };

    let stderr = stderr_reader
        .and_then(|h| h.join().ok())
        .unwrap_or_default();
    if let Some(h) = stdin_writer {
        let _ = h.join();
    }
    let duration_millis = started.elapsed().as_millis() as u64;
    let stderr_digest = hex_digest(&stderr);

    if timed_out {
        return Ok(ExecutionOutcome {
            kind: OutcomeKind::Hang,
            exit_code: None,
            signal: None,
            matched_token: None,
            duration_millis,
            stderr_digest,
            setup_error: None,
        });
    }

    let status = status.expect("status present unless timed out");
    let signal = std::os::unix::process::ExitStatusExt::signal(&status);
    let exit_code = status.code();
    // Token matching applies only to processes that terminated within budget.
    let matched_token = target.crash_token_pattern.as_ref().and_then(|pattern| {
        pattern
            .find(&stderr)
            .map(|m| String::from_utf8_lossy(m.as_bytes()).into_owned())
    });

    let is_signal_crash = signal.is_some_and(|s| target.crash_signals.contains(&s));
    let kind = if is_signal_crash || matched_token.is_some() {
        OutcomeKind::Crash
    } else {
        OutcomeKind::Pass
    };

    Ok(ExecutionOutcome {
        kind,
        exit_code,
        signal,
        matched_token,
        duration_millis,
        stderr_digest,
        setup_error: None,
    })
}

fn kill_process_group(child: &mut std::process::Child) {
    let pid = child.id() as i32;
    unsafe {
        // Negative pid addresses the whole process group.
        libc::kill(-pid, libc::SIGKILL);
    }
    let _ = child.kill();
}

fn hex_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("crashing input did not crash (observed {observed:?})")]
    CrashingDidNotCrash { observed: OutcomeKind },
    #[error("passing input did not pass (observed {observed:?})")]
    PassingDidNotPass { observed: OutcomeKind },
    #[error("nondeterministic target: repeat runs of the crashing input produced different fingerprints ({first:?} vs {second:?})")]
    NondeterministicTarget {
        first: CrashFingerprint,
        second: CrashFingerprint,
    },
    #[error("target setup failed: {detail}")]
    Setup { detail: String },
}

/// Result of validating the (crashing, passing) pair against the target.
#[derive(Debug, Clone)]
pub struct BaselineClassification {
    pub fingerprint: CrashFingerprint,
    /// Target executions spent on classification.
    pub executions: u64,
}

fn outcome_to_baseline_err(outcome: &ExecutionOutcome, crashing: bool) -> BaselineError {
    if outcome.kind == OutcomeKind::SetupError {
        return BaselineError::Setup {
            detail: outcome
                .setup_error
                .clone()
                .unwrap_or_else(|| "unknown setup failure".into()),
        };
    }
    if crashing {
        BaselineError::CrashingDidNotCrash {
            observed: outcome.kind,
        }
    } else {
        BaselineError::PassingDidNotPass {
            observed: outcome.kind,
        }
    }
}

/// Confirms the crashing input crashes deterministically and returns its
/// fingerprint. Costs two executions.
pub fn classify_crashing(
    target: &TargetSpec,
    crashing: &ByteInput,
) -> Result<(CrashFingerprint, u64), BaselineError> {
    let first = execute(target, crashing);
    let Some(first_fp) = first.fingerprint() else {
        return Err(outcome_to_baseline_err(&first, true));
    };
    let second = execute(target, crashing);
    let Some(second_fp) = second.fingerprint() else {
        return Err(BaselineError::NondeterministicTarget {
            first: first_fp,
            second: CrashFingerprint {
                signal: second.signal,
                matched_token: second.matched_token,
                exit_code: second.exit_code,
            },
        });
    };
    if first_fp != second_fp {
        return Err(BaselineError::NondeterministicTarget {
            first: first_fp,
            second: second_fp,
        });
    }
    Ok((first_fp, 2))
}

/// Validates both inputs: the crashing input must crash (twice, with equal
/// fingerprints) and the passing input must pass. Costs three executions.
pub fn classify_baseline(
    target: &TargetSpec,
    crashing: &ByteInput,
    passing: &ByteInput,
) -> Result<BaselineClassification, BaselineError> {
    let (fingerprint, crash_runs) = classify_crashing(target, crashing)?;
    let pass_outcome = execute(target, passing);
    if pass_outcome.kind != OutcomeKind::Pass {
        return Err(outcome_to_baseline_err(&pass_outcome, false));
    }
    Ok(BaselineClassification {
        fingerprint,
        executions: crash_runs + 1,
    })
}

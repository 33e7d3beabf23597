//! Crash-input refinement and the ddmin baseline.
//!
//! [`diffmin`] iteratively re-derives the substring edits between the current
//! crashing input and the passing input, applies each candidate edit, and
//! commits the crash-preserving candidate closest to the passing input. Each
//! commit strictly decreases the Levenshtein distance, so the loop terminates
//! after at most `levenshtein(crashing, passing)` iterations.
//!
//! [`ddmin`] is the classic delta-debugging minimizer over byte chunks,
//! included as the evaluation baseline. Both report every target execution
//! they spend and honor optional execution/wall-clock budgets by returning
//! the best-so-far result with a truncation flag.

use crate::alignment::levenshtein;
use crate::edit::{edit_apply, get_edits, Edit};
use crate::exec::{
    classify_baseline, classify_crashing, execute, BaselineError, CrashFingerprint, TargetSpec,
};
use crate::input::ByteInput;
use serde::Serialize;
use std::io::Write;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MinimizeError {
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("worker count must be at least 1")]
    ZeroWorkers,
}

/// Why a run stopped before natural termination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum TruncationReason {
    ExecutionBudget,
    WallClockBudget,
    Interrupted,
}

/// Knobs for [`diffmin`].
#[derive(Debug, Clone)]
pub struct DiffMinOptions {
    /// Worker threads for candidate evaluation. Results are identical for
    /// any worker count.
    pub workers: usize,
    /// Cap on candidate executions (baseline classification excluded).
    pub max_candidate_executions: Option<u64>,
    /// Wall-clock budget, checked at iteration boundaries.
    pub max_wall_time: Option<Duration>,
    /// Cooperative cancellation (e.g. SIGINT), checked at iteration
    /// boundaries.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for DiffMinOptions {
    fn default() -> Self {
        Self {
            workers: default_worker_count(),
            max_candidate_executions: None,
            max_wall_time: None,
            cancel: None,
        }
    }
}

/// Available parallelism capped at 8.
pub fn default_worker_count() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(8)
}

/// One refinement iteration: which edits were considered, which preserved
/// the crash, and what was committed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IterationRecord {
    pub iteration_index: u64,
    pub distance_before: u64,
    pub edits_considered: u64,
    pub edits_crash_preserving: u64,
    pub chosen_edit: Option<Edit>,
    pub distance_after: u64,
    pub executions: u64,
}

/// Full record of one [`diffmin`] run.
#[derive(Debug, Clone)]
pub struct MinimizationTrace {
    pub iterations: Vec<IterationRecord>,
    /// All target executions, including the three baseline-classification
    /// runs.
    pub total_executions: u64,
    pub wall_millis: u64,
    pub final_input: ByteInput,
    pub reference_fingerprint: CrashFingerprint,
    pub truncation: Option<TruncationReason>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TraceSummaryLine<'a> {
    iterations: usize,
    total_executions: u64,
    wall_millis: u64,
    final_input: String,
    final_length: usize,
    reference_fingerprint: &'a CrashFingerprint,
    truncated: bool,
    truncation_reason: Option<TruncationReason>,
}

impl MinimizationTrace {
    /// Writes the trace as JSON lines: one object per iteration record, then
    /// one summary object. Byte payloads are lowercase hex.
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for record in &self.iterations {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        let summary = TraceSummaryLine {
            iterations: self.iterations.len(),
            total_executions: self.total_executions,
            wall_millis: self.wall_millis,
            final_input: self.final_input.to_hex(),
            final_length: self.final_input.len(),
            reference_fingerprint: &self.reference_fingerprint,
            truncated: self.truncation.is_some(),
            truncation_reason: self.truncation,
        };
        serde_json::to_writer(&mut out, &summary)?;
        out.write_all(b"\n")
    }
}

struct CandidateEval {
    index: usize,
    input: ByteInput,
    distance: u64,
    preserving: bool,
}

/// Evaluates `edits[..]` against the target, in parallel but with results
/// identical to a sequential scan.
fn evaluate_candidates(
    target: &TargetSpec,
    base: &ByteInput,
    passing: &ByteInput,
    edits: &[Edit],
    baseline: &CrashFingerprint,
    workers: usize,
) -> Vec<CandidateEval> {
    let n = edits.len();
    if n == 0 {
        return Vec::new();
    }
    let slots: Mutex<Vec<Option<CandidateEval>>> = Mutex::new((0..n).map(|_| None).collect());
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers.min(n) {
            scope.spawn(|| loop {
                let index = cursor.fetch_add(1, Ordering::SeqCst);
                if index >= n {
                    break;
                }
                let candidate = edit_apply(base, &edits[index])
                    .expect("edits are derived against the current baseline");
                let outcome = execute(target, &candidate);
                let preserving = outcome.fingerprint().is_some_and(|fp| fp == *baseline);
                let distance = if preserving {
                    levenshtein(passing, &candidate) as u64
                } else {
                    0
                };
                slots.lock().unwrap()[index] = Some(CandidateEval {
                    index,
                    input: candidate,
                    distance,
                    preserving,
                });
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every candidate slot is filled"))
        .collect()
}

fn budget_stop(
    options_cancel: &Option<Arc<AtomicBool>>,
    deadline: Option<Instant>,
) -> Option<TruncationReason> {
    if options_cancel
        .as_ref()
        .is_some_and(|flag| flag.load(Ordering::SeqCst))
    {
        return Some(TruncationReason::Interrupted);
    }
    if deadline.is_some_and(|d| Instant::now() >= d) {
        return Some(TruncationReason::WallClockBudget);
    }
    None
}

/// Refines `crashing` toward `passing` while preserving the crash.
///
/// Preconditions are validated up front: `crashing` must crash twice with
/// the same fingerprint and `passing` must pass. Each iteration derives the
/// current edit set, executes every candidate once, and commits the
/// crash-preserving candidate with the lowest distance to `passing`
/// (breaking exact ties by the lowest edit index). The loop ends when no
/// candidate preserves the crash, or a budget runs out.
pub fn diffmin(
    target: &TargetSpec,
    crashing: &ByteInput,
    passing: &ByteInput,
    options: &DiffMinOptions,
) -> Result<MinimizationTrace, MinimizeError> {
    if options.workers == 0 {
        return Err(MinimizeError::ZeroWorkers);
    }
    let started = Instant::now();
    let deadline = options.max_wall_time.map(|d| started + d);
    let baseline = classify_baseline(target, crashing, passing)?;

    let mut current = crashing.clone();
    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut candidate_executions: u64 = 0;
    let mut truncation: Option<TruncationReason> = None;
    let mut iteration_index: u64 = 0;

    loop {
        if let Some(reason) = budget_stop(&options.cancel, deadline) {
            truncation = Some(reason);
            break;
        }

        let edit_set = get_edits(&current, passing);
        let distance_before = levenshtein(passing, &current) as u64;
        let total_edits = edit_set.len();
        let to_evaluate = match options.max_candidate_executions {
            Some(budget) => {
                let remaining = budget.saturating_sub(candidate_executions) as usize;
                total_edits.min(remaining)
            }
            None => total_edits,
        };

        let evals = evaluate_candidates(
            target,
            &current,
            passing,
            &edit_set.edits()[..to_evaluate],
            &baseline.fingerprint,
            options.workers,
        );
        candidate_executions += to_evaluate as u64;

        let preserving_count = evals.iter().filter(|e| e.preserving).count() as u64;
        let best = evals
            .iter()
            .filter(|e| e.preserving)
            .min_by_key(|e| (e.distance, e.index));

        let (chosen_edit, distance_after) = match best {
            Some(winner) => (
                Some(edit_set.edits()[winner.index].clone()),
                winner.distance,
            ),
            None => (None, distance_before),
        };
        iterations.push(IterationRecord {
            iteration_index,
            distance_before,
            edits_considered: to_evaluate as u64,
            edits_crash_preserving: preserving_count,
            chosen_edit,
            distance_after,
            executions: to_evaluate as u64,
        });

        if let Some(winner) = best {
            debug_assert!(winner.distance < distance_before);
            current = winner.input.clone();
        }

        if to_evaluate < total_edits {
            truncation = Some(TruncationReason::ExecutionBudget);
            break;
        }
        if best.is_none() {
            break;
        }
        iteration_index += 1;
    }

    Ok(MinimizationTrace {
        iterations,
        total_executions: candidate_executions + baseline.executions,
        wall_millis: started.elapsed().as_millis() as u64,
        final_input: current,
        reference_fingerprint: baseline.fingerprint,
        truncation,
    })
}

/// Knobs for [`ddmin`].
#[derive(Debug, Clone)]
pub struct DdminOptions {
    pub max_executions: Option<u64>,
    pub max_wall_time: Option<Duration>,
    pub cancel: Option<Arc<AtomicBool>>,
    /// Run the post-hoc pass confirming no single byte can be removed.
    pub verify_one_minimal: bool,
}

impl Default for DdminOptions {
    fn default() -> Self {
        Self {
            max_executions: None,
            max_wall_time: None,
            cancel: None,
            verify_one_minimal: true,
        }
    }
}

/// Result of a [`ddmin`] run.
#[derive(Debug, Clone)]
pub struct DdminResult {
    pub minimized: ByteInput,
    /// All target executions, including the two classification runs.
    pub executions: u64,
    pub truncation: Option<TruncationReason>,
    /// Outcome of the 1-minimality verification pass; `None` when skipped
    /// (disabled or truncated).
    pub one_minimal_verified: Option<bool>,
}

/// Classic ddmin over byte chunks, preserving the crash fingerprint.
///
/// Starts at two partitions, tests subsets then complements, and refines the
/// granularity per the standard algorithm until removing any single chunk at
/// the final granularity no longer reproduces the fingerprint.
pub fn ddmin(
    target: &TargetSpec,
    crashing: &ByteInput,
    options: &DdminOptions,
) -> Result<DdminResult, MinimizeError> {
    let started = Instant::now();
    let deadline = options.max_wall_time.map(|d| started + d);
    let (fingerprint, mut executions) = classify_crashing(target, crashing)?;

    let mut truncation: Option<TruncationReason> = None;
    let reproduces = |bytes: &[u8], executions: &mut u64| -> bool {
        *executions += 1;
        let outcome = execute(target, &ByteInput::from(bytes));
        outcome.fingerprint().is_some_and(|fp| fp == fingerprint)
    };
    let out_of_budget = |executions: u64,
                         cancel: &Option<Arc<AtomicBool>>|
     -> Option<TruncationReason> {
        if let Some(reason) = budget_stop(cancel, deadline) {
            return Some(reason);
        }
        if options.max_executions.is_some_and(|max| executions >= max) {
            return Some(TruncationReason::ExecutionBudget);
        }
        None
    };

    let mut current: Vec<u8> = crashing.as_slice().to_vec();
    let mut granularity: usize = 2;

    'outer: while current.len() >= 2 && granularity <= current.len() {
        let bounds = chunk_bounds(current.len(), granularity);

        // Reduce to a subset.
        for &(start, end) in &bounds {
            if let Some(reason) = out_of_budget(executions, &options.cancel) {
                truncation = Some(reason);
                break 'outer;
            }
            let subset = current[start..end].to_vec();
            if reproduces(&subset, &mut executions) {
                current = subset;
                granularity = 2;
                continue 'outer;
            }
        }

        // Reduce to a complement. At granularity 2 the complements are the
        // subsets just tested.
        if granularity > 2 {
            for &(start, end) in &bounds {
                if let Some(reason) = out_of_budget(executions, &options.cancel) {
                    truncation = Some(reason);
                    break 'outer;
                }
                let mut complement = Vec::with_capacity(current.len() - (end - start));
                complement.extend_from_slice(&current[..start]);
                complement.extend_from_slice(&current[end..]);
                if reproduces(&complement, &mut executions) {
                    current = complement;
                    granularity = (granularity - 1).max(2);
                    continue 'outer;
                }
            }
        }

        // Refine granularity.
        if granularity >= current.len() {
            break;
        }
        granularity = (granularity * 2).min(current.len());
    }

    let minimized = ByteInput::new(current);
    let one_minimal_verified = if truncation.is_none() && options.verify_one_minimal {
        Some(verify_one_minimal(
            target,
            &minimized,
            &fingerprint,
            &mut executions,
        ))
    } else {
        None
    };

    Ok(DdminResult {
        minimized,
        executions,
        truncation,
        one_minimal_verified,
    })
}

/// Chunk boundaries for splitting `len` bytes into `parts` near-equal parts.
fn chunk_bounds(len: usize, parts: usize) -> Vec<(usize, usize)> {
    (0..parts)
        .map(|k| (k * len / parts, (k + 1) * len / parts))
        .filter(|(s, e)| e > s)
        .collect()
}

/// Confirms no single byte can be removed while keeping the fingerprint.
fn verify_one_minimal(
    target: &TargetSpec,
    input: &ByteInput,
    fingerprint: &CrashFingerprint,
    executions: &mut u64,
) -> bool {
    let bytes = input.as_slice();
    if bytes.len() < 2 {
        return true;
    }
    for skip in 0..bytes.len() {
        let mut candidate = Vec::with_capacity(bytes.len() - 1);
        candidate.extend_from_slice(&bytes[..skip]);
        candidate.extend_from_slice(&bytes[skip + 1..]);
        *executions += 1;
        let outcome = execute(target, &ByteInput::new(candidate));
        if outcome.fingerprint().is_some_and(|fp| fp == *fingerprint) {
            return false;
        }
    }
    true
}

/// Distances of the original and refined crashing inputs from the passing
/// input, as compared in run reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DistanceReport {
    pub dist_original: u64,
    pub dist_refined: u64,
    /// `dist_refined / dist_original`; absent when the original distance is
    /// zero.
    pub ratio: Option<f64>,
    pub passing_len: usize,
    pub original_len: usize,
    pub refined_len: usize,
}

pub fn distance_report(
    passing: &ByteInput,
    original: &ByteInput,
    refined: &ByteInput,
) -> DistanceReport {
    let dist_original = levenshtein(passing, original) as u64;
    let dist_refined = levenshtein(passing, refined) as u64;
    let ratio = if dist_original == 0 {
        None
    } else {
        Some(dist_refined as f64 / dist_original as f64)
    };
    DistanceReport {
        dist_original,
        dist_refined,
        ratio,
        passing_len: passing.len(),
        original_len: original.len(),
        refined_len: refined.len(),
    }
}

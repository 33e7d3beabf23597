//! Crash-input refinement toolkit.
//!
//! Given a fuzzed crashing input and a familiar passing input, the minimizer
//! produces a new input that still reproduces the same crash but is lexically
//! as close as possible to the passing one, which makes the failure-inducing
//! part of the input stand out. The crate also ships the classic ddmin
//! size-minimizer as a baseline and an Op2 spectrum-based fault localization
//! engine for measuring how refinement affects localization accuracy.
//!
//! Modules:
//!
//! * [`input`] — immutable byte-sequence inputs.
//! * [`alignment`] — Levenshtein distance and linear-space optimal alignment.
//! * [`edit`] — substring edits derived from alignments.
//! * [`exec`] — running the target and fingerprinting crashes.
//! * [`minimize`] — the refinement loop, ddmin, and distance reports.
//! * [`sbfl`] — Op2 suspiciousness ranking over coverage spectra.
//! * [`cli`] — the `diffmin` command-line front end.

pub mod alignment;
pub mod cli;
pub mod edit;
pub mod exec;
pub mod input;
pub mod minimize;
pub mod sbfl;

pub use alignment::{align, dp_align_reference, levenshtein, AlignmentOp, AlignmentTrace};
pub use edit::{edit_apply, get_edits, Edit, EditKind, EditSet};
pub use exec::{
    classify_baseline, classify_crashing, execute, same_crash, CrashFingerprint,
    ExecutionOutcome, OutcomeKind, TargetSpec,
};
pub use input::ByteInput;
pub use minimize::{
    ddmin, diffmin, distance_report, DdminOptions, DdminResult, DiffMinOptions, DistanceReport,
    IterationRecord, MinimizationTrace, TruncationReason,
};
pub use sbfl::{
    compare_setups, load_manifest, op2_score, rank, ComparisonReport, CoverageSpectrum,
    Granularity, SuspiciousnessRanking,
};

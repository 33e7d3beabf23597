//! Byte-level Levenshtein distance and optimal alignment in linear space.
//!
//! [`levenshtein`] computes the unit-cost edit distance with a two-row dynamic
//! program. [`align`] additionally recovers one cost-optimal alignment using
//! Hirschberg's divide-and-conquer scheme, so peak memory stays linear in the
//! target length (plus a logarithmic recursion stack) instead of quadratic.
//!
//! Many alignments can share the optimal cost. To make every downstream
//! consumer reproducible, this module fixes one canonical alignment per input
//! pair:
//!
//! * recursion splits the source at its midpoint and picks the **rightmost**
//!   target column minimizing `prefix_cost + suffix_cost`;
//! * a single-byte source aligns to the **first** occurrence of its byte in
//!   the target (substituting the first target byte when absent);
//! * diagonal ops are preferred to deletes, and deletes to inserts, wherever
//!   the base cases leave a choice.
//!
//! [`dp_align_reference`] evaluates the same rules over full matrices and
//! exists to cross-check `align` in tests; it refuses inputs whose matrix
//! would be unreasonably large.

use crate::input::ByteInput;
use thiserror::Error;

/// Matrix-size cap for [`dp_align_reference`]: `|source| * |target|` cells.
pub const REFERENCE_CELL_CAP: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum AlignmentError {
    #[error(
        "reference alignment refused: {source_len} x {target_len} cells exceed the cap of {cap}"
    )]
    CapacityExceeded {
        source_len: usize,
        target_len: usize,
        cap: u64,
    },
}

/// One atomic alignment step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentOpKind {
    /// Equal bytes consumed from both sequences; cost 0.
    Match,
    /// Differing bytes consumed from both sequences; cost 1.
    Substitute,
    /// One target byte consumed; cost 1.
    Insert,
    /// One source byte consumed; cost 1.
    Delete,
}

/// An alignment step annotated with the positions it applies to.
///
/// `source_offset` and `target_offset` are the cursor positions *before* the
/// op executes; ops that do not consume a given side carry that side's cursor
/// unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignmentOp {
    pub kind: AlignmentOpKind,
    pub source_offset: usize,
    pub target_offset: usize,
}

impl AlignmentOp {
    pub fn cost(&self) -> usize {
        match self.kind {
            AlignmentOpKind::Match => 0,
            _ => 1,
        }
    }

    pub fn consumes_source(&self) -> bool {
        !matches!(self.kind, AlignmentOpKind::Insert)
    }

    pub fn consumes_target(&self) -> bool {
        !matches!(self.kind, AlignmentOpKind::Delete)
    }
}

/// A complete, cost-optimal alignment between two byte sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentTrace {
    ops: Vec<AlignmentOp>,
    source_len: usize,
    target_len: usize,
}

impl AlignmentTrace {
    pub fn ops(&self) -> &[AlignmentOp] {
        &self.ops
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    /// Total cost of the trace; equals the Levenshtein distance.
    pub fn cost(&self) -> usize {
        self.ops.iter().map(AlignmentOp::cost).sum()
    }

    /// Checks that the trace consumes `source` and reconstructs `target`
    /// exactly, with gap-free non-decreasing offsets.
    pub fn is_valid_for(&self, source: &[u8], target: &[u8]) -> bool {
        if self.source_len != source.len() || self.target_len != target.len() {
            return false;
        }
        let mut i = 0usize;
        let mut j = 0usize;
        let mut rebuilt = Vec::with_capacity(target.len());
        for op in &self.ops {
            if op.source_offset != i || op.target_offset != j {
                return false;
            }
            match op.kind {
                AlignmentOpKind::Match => {
                    if i >= source.len() || j >= target.len() || source[i] != target[j] {
                        return false;
                    }
                    rebuilt.push(source[i]);
                    i += 1;
                    j += 1;
                }
                AlignmentOpKind::Substitute => {
                    if i >= source.len() || j >= target.len() || source[i] == target[j] {
                        return false;
                    }
                    rebuilt.push(target[j]);
                    i += 1;
                    j += 1;
                }
                AlignmentOpKind::Insert => {
                    if j >= target.len() {
                        return false;
                    }
                    rebuilt.push(target[j]);
                    j += 1;
                }
                AlignmentOpKind::Delete => {
                    if i >= source.len() {
                        return false;
                    }
                    i += 1;
                }
            }
        }
        i == source.len() && j == target.len() && rebuilt == target
    }
}

/// Unit-cost Levenshtein distance between two byte sequences.
///
/// Two-row dynamic program: `O(|a| * |b|)` time, `O(min(|a|, |b|))` memory.
pub fn levenshtein(a: &ByteInput, b: &ByteInput) -> usize {
    levenshtein_bytes(a.as_slice(), b.as_slice())
}

pub(crate) fn levenshtein_bytes(a: &[u8], b: &[u8]) -> usize {
    // Keep the row along the shorter sequence.
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut row: Vec<u32> = (0..=short.len() as u32).collect();
    for (i, &lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i as u32 + 1;
        for (j, &sc) in short.iter().enumerate() {
            let up = row[j + 1];
            let sub = diag + u32::from(lc != sc);
            row[j + 1] = sub.min(up + 1).min(row[j] + 1);
            diag = up;
        }
    }
    *row.last().unwrap() as usize
}

/// `dist(a, b[..j])` for every `j`, i.e. the DP row after consuming all of `a`.
fn prefix_cost_row(a: &[u8], b: &[u8]) -> Vec<u32> {
    let mut row: Vec<u32> = (0..=b.len() as u32).collect();
    for (i, &ac) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i as u32 + 1;
        for (j, &bc) in b.iter().enumerate() {
            let up = row[j + 1];
            let sub = diag + u32::from(ac != bc);
            row[j + 1] = sub.min(up + 1).min(row[j] + 1);
            diag = up;
        }
    }
    row
}

/// `dist(a, b[j..])` for every `j`: the mirrored DP row.
fn suffix_cost_row(a: &[u8], b: &[u8]) -> Vec<u32> {
    let n = b.len();
    let mut row: Vec<u32> = (0..=n as u32).rev().collect();
    for (i, &ac) in a.iter().rev().enumerate() {
        let mut diag = row[n];
        row[n] = i as u32 + 1;
        for j in (0..n).rev() {
            let down = row[j];
            let sub = diag + u32::from(ac != b[j]);
            row[j] = sub.min(down + 1).min(row[j + 1] + 1);
            diag = down;
        }
    }
    row
}

/// Computes the canonical cost-optimal alignment from `source` to `target`.
///
/// Linear-space Hirschberg recursion; the result's [`AlignmentTrace::cost`]
/// always equals [`levenshtein`]`(source, target)`.
pub fn align(source: &ByteInput, target: &ByteInput) -> AlignmentTrace {
    let a = source.as_slice();
    let b = target.as_slice();
    let mut ops = Vec::new();
    hirschberg(a, b, 0, 0, &mut ops);
    AlignmentTrace {
        ops,
        source_len: a.len(),
        target_len: b.len(),
    }
}

fn hirschberg(a: &[u8], b: &[u8], a_base: usize, b_base: usize, ops: &mut Vec<AlignmentOp>) {
    if a.is_empty() {
        for j in 0..b.len() {
            ops.push(AlignmentOp {
                kind: AlignmentOpKind::Insert,
                source_offset: a_base,
                target_offset: b_base + j,
            });
        }
        return;
    }
    if b.is_empty() {
        for i in 0..a.len() {
            ops.push(AlignmentOp {
                kind: AlignmentOpKind::Delete,
                source_offset: a_base + i,
                target_offset: b_base,
            });
        }
        return;
    }
    if a.len() == 1 {
        push_single_source_ops(a[0], b, a_base, b_base, ops);
        return;
    }

    let mid = a.len() / 2;
    let split = {
        let forward = prefix_cost_row(&a[..mid], b);
        let backward = suffix_cost_row(&a[mid..], b);
        rightmost_min_index(&forward, &backward)
    };
    hirschberg(&a[..mid], &b[..split], a_base, b_base, ops);
    hirschberg(&a[mid..], &b[split..], a_base + mid, b_base + split, ops);
}

/// Rightmost index minimizing `forward[j] + backward[j]`.
fn rightmost_min_index(forward: &[u32], backward: &[u32]) -> usize {
    let mut best = 0usize;
    let mut best_sum = u32::MAX;
    for (j, (&f, &g)) in forward.iter().zip(backward.iter()).enumerate() {
        let sum = f + g;
        if sum <= best_sum {
            best_sum = sum;
            best = j;
        }
    }
    best
}

/// Base case: a one-byte source against a non-empty target. The byte aligns
/// to its first occurrence in the target, or substitutes the first target
/// byte when absent; everything else is inserted.
fn push_single_source_ops(
    byte: u8,
    b: &[u8],
    a_base: usize,
    b_base: usize,
    ops: &mut Vec<AlignmentOp>,
) {
    debug_assert!(!b.is_empty());
    let pivot = b.iter().position(|&x| x == byte).unwrap_or(0);
    for j in 0..pivot {
        ops.push(AlignmentOp {
            kind: AlignmentOpKind::Insert,
            source_offset: a_base,
            target_offset: b_base + j,
        });
    }
    ops.push(AlignmentOp {
        kind: if b[pivot] == byte {
            AlignmentOpKind::Match
        } else {
            AlignmentOpKind::Substitute
        },
        source_offset: a_base,
        target_offset: b_base + pivot,
    });
    for j in pivot + 1..b.len() {
        ops.push(AlignmentOp {
            kind: AlignmentOpKind::Insert,
            source_offset: a_base + 1,
            target_offset: b_base + j,
        });
    }
}

/// Full-matrix reference alignment, applying the same canonical rules as
/// [`align`] without the linear-space machinery. Intended for tests.
///
/// Refuses input pairs whose `|source| * |target|` exceeds
/// [`REFERENCE_CELL_CAP`].
pub fn dp_align_reference(
    source: &ByteInput,
    target: &ByteInput,
) -> Result<AlignmentTrace, AlignmentError> {
    let a = source.as_slice();
    let b = target.as_slice();
    if (a.len() as u64) * (b.len() as u64) > REFERENCE_CELL_CAP {
        return Err(AlignmentError::CapacityExceeded {
            source_len: a.len(),
            target_len: b.len(),
            cap: REFERENCE_CELL_CAP,
        });
    }
    let mut ops = Vec::new();
    reference_rec(a, b, 0, 0, &mut ops);
    Ok(AlignmentTrace {
        ops,
        source_len: a.len(),
        target_len: b.len(),
    })
}

fn reference_rec(a: &[u8], b: &[u8], a_base: usize, b_base: usize, ops: &mut Vec<AlignmentOp>) {
    if a.is_empty() {
        for j in 0..b.len() {
            ops.push(AlignmentOp {
                kind: AlignmentOpKind::Insert,
                source_offset: a_base,
                target_offset: b_base + j,
            });
        }
        return;
    }
    if b.is_empty() {
        for i in 0..a.len() {
            ops.push(AlignmentOp {
                kind: AlignmentOpKind::Delete,
                source_offset: a_base + i,
                target_offset: b_base,
            });
        }
        return;
    }
    if a.len() == 1 {
        reference_single_source(a[0], b, a_base, b_base, ops);
        return;
    }

    let prefix = full_prefix_matrix(a, b);
    let suffix = full_suffix_matrix(a, b);
    let mid = a.len() / 2;
    let mut split = 0usize;
    let mut best = u32::MAX;
    for j in 0..=b.len() {
        let sum = prefix[mid][j] + suffix[mid][j];
        if sum <= best {
            best = sum;
            split = j;
        }
    }
    reference_rec(&a[..mid], &b[..split], a_base, b_base, ops);
    reference_rec(&a[mid..], &b[split..], a_base + mid, b_base + split, ops);
}

fn reference_single_source(
    byte: u8,
    b: &[u8],
    a_base: usize,
    b_base: usize,
    ops: &mut Vec<AlignmentOp>,
) {
    let pivot = b.iter().position(|&x| x == byte).unwrap_or(0);
    for (j, &bc) in b.iter().enumerate() {
        if j == pivot {
            ops.push(AlignmentOp {
                kind: if bc == byte {
                    AlignmentOpKind::Match
                } else {
                    AlignmentOpKind::Substitute
                },
                source_offset: a_base,
                target_offset: b_base + j,
            });
        } else {
            ops.push(AlignmentOp {
                kind: AlignmentOpKind::Insert,
                source_offset: if j < pivot { a_base } else { a_base + 1 },
                target_offset: b_base + j,
            });
        }
    }
}

/// `matrix[i][j] = dist(a[..i], b[..j])`.
fn full_prefix_matrix(a: &[u8], b: &[u8]) -> Vec<Vec<u32>> {
    let (m, n) = (a.len(), b.len());
    let mut d = vec![vec![0u32; n + 1]; m + 1];
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j as u32;
    }
    for i in 1..=m {
        d[i][0] = i as u32;
        for j in 1..=n {
            let sub = d[i - 1][j - 1] + u32::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d
}

/// `matrix[i][j] = dist(a[i..], b[j..])`.
fn full_suffix_matrix(a: &[u8], b: &[u8]) -> Vec<Vec<u32>> {
    let (m, n) = (a.len(), b.len());
    let mut d = vec![vec![0u32; n + 1]; m + 1];
    for (j, cell) in d[m].iter_mut().enumerate() {
        *cell = (n - j) as u32;
    }
    for i in (0..m).rev() {
        d[i][n] = (m - i) as u32;
        for j in (0..n).rev() {
            let sub = d[i + 1][j + 1] + u32::from(a[i] != b[j]);
            d[i][j] = sub.min(d[i + 1][j] + 1).min(d[i][j + 1] + 1);
        }
    }
    d
}

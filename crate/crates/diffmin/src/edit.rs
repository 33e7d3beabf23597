//! Substring-level edits derived from an alignment.
//!
//! [`get_edits`] coalesces each maximal run of non-match alignment ops into a
//! single substring insertion, deletion, or replacement; [`edit_apply`]
//! applies one of those edits to an input. Applying a whole edit set in
//! descending offset order turns the crashing input into the passing input;
//! applying a single edit moves it exactly `cost` bytes closer.

use crate::alignment::{align, AlignmentOpKind};
use crate::input::ByteInput;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EditError {
    #[error("degenerate edit: removed and inserted are both empty")]
    EmptyEdit,
    #[error("edit span {offset}..{span_end} exceeds input length {input_len}")]
    OutOfBounds {
        offset: usize,
        span_end: usize,
        input_len: usize,
    },
    #[error("stale edit: bytes at offset {offset} do not match the edit's removed bytes")]
    StaleEdit { offset: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum EditKind {
    InsertSubstring,
    DeleteSubstring,
    ReplaceSubstring,
}

/// A substring insertion, deletion, or replacement anchored at a byte offset.
///
/// `cost` is `max(|removed|, |inserted|)`, the number of atomic alignment ops
/// the edit coalesces; it is always at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    kind: EditKind,
    offset: usize,
    removed: Vec<u8>,
    inserted: Vec<u8>,
}

impl Edit {
    /// Builds an edit, inferring its kind from the removed/inserted contents.
    /// Rejects the degenerate empty/empty edit so zero-cost edits stay
    /// unrepresentable.
    pub fn new(offset: usize, removed: Vec<u8>, inserted: Vec<u8>) -> Result<Self, EditError> {
        let kind = match (removed.is_empty(), inserted.is_empty()) {
            (true, true) => return Err(EditError::EmptyEdit),
            (true, false) => EditKind::InsertSubstring,
            (false, true) => EditKind::DeleteSubstring,
            (false, false) => EditKind::ReplaceSubstring,
        };
        Ok(Self {
            kind,
            offset,
            removed,
            inserted,
        })
    }

    pub fn kind(&self) -> EditKind {
        self.kind
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn removed(&self) -> &[u8] {
        &self.removed
    }

    pub fn inserted(&self) -> &[u8] {
        &self.inserted
    }

    pub fn cost(&self) -> usize {
        self.removed.len().max(self.inserted.len())
    }
}

impl Serialize for Edit {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Edit", 5)?;
        s.serialize_field("kind", &self.kind)?;
        s.serialize_field("offset", &self.offset)?;
        s.serialize_field("removed", &hex::encode(&self.removed))?;
        s.serialize_field("inserted", &hex::encode(&self.inserted))?;
        s.serialize_field("cost", &self.cost())?;
        s.end()
    }
}

/// The ordered edits converting `baseline` into `reference`.
///
/// Edits are sorted ascending by offset with pairwise-disjoint removal spans;
/// their costs sum to `levenshtein(baseline, reference)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditSet {
    edits: Vec<Edit>,
    baseline: ByteInput,
    reference: ByteInput,
}

impl EditSet {
    pub fn edits(&self) -> &[Edit] {
        &self.edits
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn baseline(&self) -> &ByteInput {
        &self.baseline
    }

    pub fn reference(&self) -> &ByteInput {
        &self.reference
    }

    pub fn total_cost(&self) -> usize {
        self.edits.iter().map(Edit::cost).sum()
    }

    /// Applies every edit in descending offset order, yielding `reference`.
    pub fn apply_all(&self) -> Result<ByteInput, EditError> {
        let mut current = self.baseline.clone();
        for edit in self.edits.iter().rev() {
            current = edit_apply(&current, edit)?;
        }
        Ok(current)
    }
}

/// Derives the substring edits converting `crashing` into `passing`.
///
/// Each maximal contiguous run of non-match ops in the canonical alignment
/// becomes one edit; identical inputs yield an empty set.
pub fn get_edits(crashing: &ByteInput, passing: &ByteInput) -> EditSet {
    let trace = align(crashing, passing);
    let source = crashing.as_slice();
    let target = passing.as_slice();

    let mut edits = Vec::new();
    let mut run: Option<(usize, usize, usize, usize)> = None; // src start/end, tgt start/end

    for op in trace.ops() {
        if op.kind == AlignmentOpKind::Match {
            if let Some((ss, se, ts, te)) = run.take() {
                edits.push(run_to_edit(source, target, ss, se, ts, te));
            }
            continue;
        }
        let (_, se, _, te) = run.get_or_insert((
            op.source_offset,
            op.source_offset,
            op.target_offset,
            op.target_offset,
        ));
        debug_assert_eq!(*se, op.source_offset);
        debug_assert_eq!(*te, op.target_offset);
        if op.consumes_source() {
            *se += 1;
        }
        if op.consumes_target() {
            *te += 1;
        }
    }
    if let Some((ss, se, ts, te)) = run.take() {
        edits.push(run_to_edit(source, target, ss, se, ts, te));
    }

    EditSet {
        edits,
        baseline: crashing.clone(),
        reference: passing.clone(),
    }
}

fn run_to_edit(
    source: &[u8],
    target: &[u8],
    src_start: usize,
    src_end: usize,
    tgt_start: usize,
    tgt_end: usize,
) -> Edit {
    let removed = source[src_start..src_end].to_vec();
    let inserted = target[tgt_start..tgt_end].to_vec();
    Edit::new(src_start, removed, inserted).expect("non-match runs are never empty")
}

/// Applies a single edit to `input`, replacing the edit's removed bytes with
/// its inserted bytes at the edit's offset.
///
/// Fails when the edit does not fit the input or the bytes at the edit's span
/// differ from its removed bytes — the edit was derived against a different
/// baseline and its offsets cannot be trusted.
pub fn edit_apply(input: &ByteInput, edit: &Edit) -> Result<ByteInput, EditError> {
    let bytes = input.as_slice();
    let span_end = edit.offset() + edit.removed().len();
    if span_end > bytes.len() {
        return Err(EditError::OutOfBounds {
            offset: edit.offset(),
            span_end,
            input_len: bytes.len(),
        });
    }
    if &bytes[edit.offset()..span_end] != edit.removed() {
        return Err(EditError::StaleEdit {
            offset: edit.offset(),
        });
    }
    let mut out = Vec::with_capacity(bytes.len() - edit.removed().len() + edit.inserted().len());
    out.extend_from_slice(&bytes[..edit.offset()]);
    out.extend_from_slice(edit.inserted());
    out.extend_from_slice(&bytes[span_end..]);
    Ok(ByteInput::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::levenshtein;

    fn bi(s: &str) -> ByteInput {
        ByteInput::from(s)
    }

    #[test]
    fn coalesces_deletion_run() {
        let set = get_edits(&bi("abXYcd"), &bi("abcd"));
        assert_eq!(set.len(), 1);
        let e = &set.edits()[0];
        assert_eq!(e.kind(), EditKind::DeleteSubstring);
        assert_eq!(e.offset(), 2);
        assert_eq!(e.removed(), b"XY");
        assert_eq!(e.inserted(), b"");
        assert_eq!(e.cost(), 2);
    }

    #[test]
    fn identical_inputs_produce_empty_set() {
        let set = get_edits(&bi("abcd"), &bi("abcd"));
        assert!(set.is_empty());
        assert_eq!(set.apply_all().unwrap(), bi("abcd"));
    }

    #[test]
    fn coalesces_replacement_run() {
        let set = get_edits(&bi("abQcd"), &bi("abZZZcd"));
        assert_eq!(set.len(), 1);
        let e = &set.edits()[0];
        assert_eq!(e.kind(), EditKind::ReplaceSubstring);
        assert_eq!(e.offset(), 2);
        assert_eq!(e.removed(), b"Q");
        assert_eq!(e.inserted(), b"ZZZ");
        assert_eq!(e.cost(), 3);
    }

    #[test]
    fn apply_deletes_substring() {
        let e = Edit::new(2, b"XY".to_vec(), Vec::new()).unwrap();
        assert_eq!(edit_apply(&bi("abXYcd"), &e).unwrap(), bi("abcd"));
    }

    #[test]
    fn apply_appends_at_end() {
        let e = Edit::new(4, Vec::new(), b"ZZ".to_vec()).unwrap();
        assert_eq!(edit_apply(&bi("abcd"), &e).unwrap(), bi("abcdZZ"));
    }

    #[test]
    fn empty_edit_is_rejected_at_construction() {
        assert!(matches!(
            Edit::new(0, Vec::new(), Vec::new()),
            Err(EditError::EmptyEdit)
        ));
    }

    #[test]
    fn stale_edit_is_detected() {
        let e = Edit::new(2, b"XY".to_vec(), Vec::new()).unwrap();
        assert!(matches!(
            edit_apply(&bi("abQQcd"), &e),
            Err(EditError::StaleEdit { offset: 2 })
        ));
    }

    #[test]
    fn out_of_bounds_edit_is_detected() {
        let e = Edit::new(3, b"XY".to_vec(), Vec::new()).unwrap();
        assert!(matches!(
            edit_apply(&bi("abcd"), &e),
            Err(EditError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn edit_set_invariants_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xed17);
        for _ in 0..300 {
            let lc = rng.gen_range(0..=48);
            let lp = rng.gen_range(0..=48);
            let c: Vec<u8> = (0..lc).map(|_| rng.gen_range(b'a'..=b'e')).collect();
            let p: Vec<u8> = (0..lp).map(|_| rng.gen_range(b'a'..=b'e')).collect();
            let (c, p) = (ByteInput::new(c), ByteInput::new(p));
            let set = get_edits(&c, &p);

            // Sorted, disjoint spans.
            for pair in set.edits().windows(2) {
                let end = pair[0].offset() + pair[0].removed().len();
                assert!(pair[0].offset() < pair[1].offset());
                assert!(end <= pair[1].offset());
            }
            // Cost accounting and full-application roundtrip.
            assert_eq!(set.total_cost(), levenshtein(&c, &p));
            assert_eq!(set.apply_all().unwrap(), p);
            // Single-edit distance identity.
            let base_dist = levenshtein(&c, &p);
            for e in set.edits() {
                let applied = edit_apply(&c, e).unwrap();
                assert_eq!(levenshtein(&applied, &p), base_dist - e.cost());
            }
        }
    }

    #[test]
    fn edit_serializes_with_hex_payloads() {
        let e = Edit::new(3, b"ab".to_vec(), b"Z".to_vec()).unwrap();
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["kind"], "replaceSubstring");
        assert_eq!(json["offset"], 3);
        assert_eq!(json["removed"], "6162");
        assert_eq!(json["inserted"], "5a");
        assert_eq!(json["cost"], 2);
    }
}

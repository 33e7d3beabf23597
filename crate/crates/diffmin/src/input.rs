//! Immutable byte-sequence inputs.
//!
//! Every input handled by this crate — crashing inputs, passing seeds,
//! minimization candidates — is an opaque, immutable byte string. Inputs are
//! never text-decoded: fuzzed inputs are arbitrary binaries and a trailing
//! newline is a real difference.

use std::fmt;
use std::sync::Arc;

/// Maximum representable input length in bytes.
pub const MAX_INPUT_LEN: usize = i32::MAX as usize;

/// An immutable finite byte sequence used as a test input.
///
/// Cloning is cheap (shared buffer), which matters in the minimizer where the
/// same input is compared and re-executed many times.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ByteInput {
    bytes: Arc<[u8]>,
}

impl ByteInput {
    /// Wraps a byte buffer.
    ///
    /// Panics if the buffer exceeds [`MAX_INPUT_LEN`].
    pub fn new(bytes: impl Into<Arc<[u8]>>) -> Self {
        let bytes = bytes.into();
        assert!(
            bytes.len() <= MAX_INPUT_LEN,
            "input length {} exceeds the {} byte cap",
            bytes.len(),
            MAX_INPUT_LEN
        );
        Self { bytes }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    /// Lowercase hexadecimal rendering, as used in trace logs.
    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }
}

impl From<Vec<u8>> for ByteInput {
    fn from(bytes: Vec<u8>) -> Self {
        Self::new(bytes)
    }
}

impl From<&[u8]> for ByteInput {
    fn from(bytes: &[u8]) -> Self {
        Self::new(bytes.to_vec())
    }
}

impl<const N: usize> From<&[u8; N]> for ByteInput {
    fn from(bytes: &[u8; N]) -> Self {
        Self::new(bytes.to_vec())
    }
}

impl From<&str> for ByteInput {
    fn from(s: &str) -> Self {
        Self::new(s.as_bytes().to_vec())
    }
}

impl AsRef<[u8]> for ByteInput {
    fn as_ref(&self) -> &[u8] {
        &self.bytes
    }
}

impl fmt::Debug for ByteInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Short inputs print as escaped ASCII, long ones as a hex prefix.
        if self.len() <= 64 {
            write!(f, "ByteInput({:?})", self.bytes.escape_ascii().to_string())
        } else {
            write!(
                f,
                "ByteInput(len={}, {}…)",
                self.len(),
                hex::encode(&self.bytes[..16])
            )
        }
    }
}

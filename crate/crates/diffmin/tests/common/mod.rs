//! Shared helpers for integration tests: compiling the C fixture targets and
//! building target specs around them.
#![allow(dead_code)]

use diffmin::TargetSpec;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::Command;

/// Compiles `fixtures/<name>.c` (once per source content) and returns the
/// binary path. Parallel test binaries may race to build the same fixture;
/// the rename makes that benign.
pub fn fixture(name: &str) -> PathBuf {
    let src = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.c"));
    let source = std::fs::read(&src).unwrap_or_else(|e| panic!("read {}: {e}", src.display()));
    let tag = hex::encode(&Sha256::digest(&source)[..8]);
    let out = std::env::temp_dir().join(format!("diffmin-fixture-{name}-{tag}"));
    if out.exists() {
        return out;
    }
    let scratch = std::env::temp_dir().join(format!(
        "diffmin-fixture-build-{name}-{}",
        std::process::id()
    ));
    let status = Command::new("cc")
        .args(["-O0", "-w", "-o"])
        .arg(&scratch)
        .arg(&src)
        .status()
        .expect("cc is available");
    assert!(status.success(), "fixture {name} failed to compile");
    std::fs::rename(&scratch, &out).expect("move compiled fixture into place");
    out
}

/// Target spec invoking the fixture with the input as a file argument.
pub fn file_target(name: &str) -> TargetSpec {
    let binary = fixture(name).display().to_string();
    TargetSpec::new(vec![binary, "@@".into()]).unwrap()
}

/// Target spec invoking the fixture with the input on stdin.
pub fn stdin_target(name: &str) -> TargetSpec {
    let binary = fixture(name).display().to_string();
    TargetSpec::new(vec![binary]).unwrap()
}

/// Path to the built `diffmin` binary for CLI-level tests.
pub fn cli_binary() -> &'static str {
    env!("CARGO_BIN_EXE_diffmin")
}

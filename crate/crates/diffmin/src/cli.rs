//! The `diffmin` command-line front end.
//!
//! Subcommands: `minimize` (crash refinement against a passing input),
//! `ddmin` (size minimization baseline), `distance` (Levenshtein distance
//! reports), `sbfl` (Op2 ranking and setup comparison), and `batch`
//! (minimize against every seed in a directory).
//!
//! Exit codes are part of the interface:
//!
//! * 0 — success
//! * 1 — internal error (I/O, unreadable files)
//! * 2 — precondition violation (inputs, configuration, manifest schema)
//! * 3 — nondeterministic target
//! * 4 — budget truncation (partial results are still written)
//! * 130 — interrupted; the trace written so far is flushed
//!
//! `DIFFMIN_TIMEOUT_MS` and `DIFFMIN_WORKERS` override the corresponding
//! flags' defaults.

use crate::exec::{BaselineError, TargetSpec};
use crate::input::ByteInput;
use crate::minimize::{
    ddmin, default_worker_count, diffmin, distance_report, DdminOptions, DiffMinOptions,
    MinimizationTrace, MinimizeError, TruncationReason,
};
use crate::alignment;
use crate::sbfl::{compare_setups, load_manifest, rank, Granularity, SbflError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, OnceLock};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_NONDETERMINISTIC: i32 = 3;
pub const EXIT_TRUNCATED: i32 = 4;
pub const EXIT_INTERRUPTED: i32 = 130;

#[derive(Parser)]
#[command(
    name = "diffmin",
    version,
    about = "Refine fuzzed crashing inputs toward a passing input, with ddmin and Op2 fault localization for evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Refine a crashing input toward a passing input, preserving the crash.
    Minimize(MinimizeArgs),
    /// Minimize a crashing input by size (classic delta debugging).
    Ddmin(DdminArgs),
    /// Report Levenshtein distances between passing, crashing, and refined inputs.
    Distance(DistanceArgs),
    /// Rank code elements by Op2 suspiciousness from coverage manifests.
    Sbfl(SbflArgs),
    /// Run the minimizer once per seed in a directory and summarize.
    Batch(BatchArgs),
}

#[derive(Args, Clone)]
struct TargetArgs {
    /// Target command line; "@@" is replaced by the input file path. Without
    /// "@@" the input is piped to stdin. Split on whitespace.
    #[arg(long)]
    target: String,
    /// Per-run timeout in milliseconds (default 1000; env DIFFMIN_TIMEOUT_MS).
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Crash signals, comma-separated numbers or names (segv,abrt,ill,bus,fpe).
    /// Defaults to all five.
    #[arg(long, value_delimiter = ',')]
    crash_signals: Vec<String>,
    /// Regex matched against captured stderr; a match classifies the run as
    /// a crash (canary-style oracle).
    #[arg(long)]
    crash_token: Option<String>,
    /// Working directory for target runs.
    #[arg(long)]
    chdir: Option<PathBuf>,
    /// Environment override for target runs, KEY=VALUE. Repeatable.
    #[arg(long = "env", value_name = "KEY=VALUE")]
    env_overrides: Vec<String>,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    /// Maximum candidate executions before returning the best-so-far result.
    #[arg(long)]
    max_execs: Option<u64>,
    /// Wall-clock budget in milliseconds.
    #[arg(long)]
    max_wall_ms: Option<u64>,
}

#[derive(Args)]
struct MinimizeArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// The crashing input file.
    #[arg(long)]
    crash: PathBuf,
    /// The passing reference input file.
    #[arg(long, name = "pass")]
    pass: PathBuf,
    /// Where to write the refined crashing input.
    #[arg(long)]
    out: PathBuf,
    /// Trace log path (JSON lines). Defaults to <out>.trace.jsonl.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Worker threads for candidate evaluation (env DIFFMIN_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct DdminArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// The crashing input file.
    #[arg(long)]
    crash: PathBuf,
    /// Where to write the minimized crashing input.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct DistanceArgs {
    /// Passing input file, or a directory of passing seeds.
    pass: PathBuf,
    /// Crashing input file.
    crash: PathBuf,
    /// Refined crashing input file (optional).
    refined: Option<PathBuf>,
}

#[derive(Args)]
struct SbflArgs {
    /// Spectrum manifest (JSON).
    #[arg(long, required_unless_present = "compare", conflicts_with = "compare")]
    manifest: Option<PathBuf>,
    /// Ranking granularity.
    #[arg(long, default_value = "statement")]
    granularity: Granularity,
    /// File listing buggy element ids, one per line.
    #[arg(long)]
    buggy: Option<PathBuf>,
    /// How many entries of the ranking to print.
    #[arg(long, default_value_t = 20)]
    top: usize,
    /// Three manifests to compare: fuzz, ddmin, diffmin. Requires --buggy.
    #[arg(long, num_args = 3, value_names = ["FUZZ", "DDMIN", "DIFFMIN"])]
    compare: Option<Vec<PathBuf>>,
    /// Output format.
    #[arg(long, default_value = "tsv")]
    format: OutputFormat,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// The crashing input file.
    #[arg(long)]
    crash: PathBuf,
    /// Directory of passing seed files.
    #[arg(long)]
    seeds: PathBuf,
    /// Directory for refined inputs, traces, and the summary.
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads for candidate evaluation (env DIFFMIN_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Tsv,
    Json,
}

impl clap::builder::ValueParserFactory for Granularity {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Granularity>())
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(EXIT_INTERNAL, message)
    }

    fn precondition(message: impl Into<String>) -> Self {
        Self::new(EXIT_PRECONDITION, message)
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses argv and runs the selected subcommand, returning the process exit
/// code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Minimize(args) => cmd_minimize(args),
        Command::Ddmin(args) => cmd_ddmin(args),
        Command::Distance(args) => cmd_distance(args),
        Command::Sbfl(args) => cmd_sbfl(args),
        Command::Batch(args) => cmd_batch(args),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

static SIGINT_FLAG: OnceLock<Arc<AtomicBool>> = OnceLock::new();

extern "C" fn on_sigint(_: libc::c_int) {
    if let Some(flag) = SIGINT_FLAG.get() {
        flag.store(true, Ordering::SeqCst);
    }
}

/// Installs a SIGINT handler (once) and returns the shared cancellation flag.
fn sigint_flag() -> Arc<AtomicBool> {
    let flag = SIGINT_FLAG
        .get_or_init(|| Arc::new(AtomicBool::new(false)))
        .clone();
    unsafe {
        libc::signal(libc::SIGINT, on_sigint as *const () as libc::sighandler_t);
    }
    flag
}

fn env_u64(name: &str) -> Option<u64> {
    std::env::var(name).ok()?.trim().parse().ok()
}

fn resolve_timeout_ms(flag: Option<u64>) -> u64 {
    flag.or_else(|| env_u64("DIFFMIN_TIMEOUT_MS")).unwrap_or(1000)
}

fn resolve_workers(flag: Option<usize>) -> usize {
    flag.or_else(|| env_u64("DIFFMIN_WORKERS").map(|n| n as usize))
        .unwrap_or_else(default_worker_count)
}

fn parse_signal(text: &str) -> Result<i32, Failure> {
    let lowered = text.trim().to_ascii_lowercase();
    let name = lowered.strip_prefix("sig").unwrap_or(&lowered);
    let signal = match name {
        "segv" => libc::SIGSEGV,
        "abrt" | "abort" => libc::SIGABRT,
        "ill" => libc::SIGILL,
        "bus" => libc::SIGBUS,
        "fpe" => libc::SIGFPE,
        _ => name.parse::<i32>().map_err(|_| {
            Failure::precondition(format!("unrecognized crash signal {text:?}"))
        })?,
    };
    if signal <= 0 {
        return Err(Failure::precondition(format!(
            "crash signal must be positive, got {signal}"
        )));
    }
    Ok(signal)
}

fn build_target_spec(args: &TargetArgs) -> Result<TargetSpec, Failure> {
    let command: Vec<String> = args.target.split_whitespace().map(String::from).collect();
    let mut spec = TargetSpec::new(command)
        .map_err(|e| Failure::precondition(format!("invalid --target: {e}")))?
        .with_timeout_millis(resolve_timeout_ms(args.timeout_ms))
        .map_err(|e| Failure::precondition(format!("invalid timeout: {e}")))?;
    if !args.crash_signals.is_empty() {
        let signals = args
            .crash_signals
            .iter()
            .map(|s| parse_signal(s))
            .collect::<Result<Vec<_>, _>>()?;
        spec = spec.with_crash_signals(signals);
    }
    if let Some(pattern) = &args.crash_token {
        spec = spec
            .with_crash_token(pattern)
            .map_err(|e| Failure::precondition(format!("invalid --crash-token: {e}")))?;
    }
    if let Some(dir) = &args.chdir {
        spec = spec.with_working_dir(dir);
    }
    for entry in &args.env_overrides {
        let Some((key, value)) = entry.split_once('=') else {
            return Err(Failure::precondition(format!(
                "invalid --env {entry:?}: expected KEY=VALUE"
            )));
        };
        spec = spec.with_env(key, value);
    }
    Ok(spec)
}

fn read_input(path: &Path) -> Result<ByteInput, Failure> {
    std::fs::read(path)
        .map(ByteInput::new)
        .map_err(|e| Failure::internal(format!("cannot read {}: {e}", path.display())))
}

/// Writes a file atomically: temp file in the same directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let write = || -> std::io::Result<()> {
        let mut tmp = tempfile::Builder::new()
            .prefix(".diffmin-tmp-")
            .tempfile_in(dir)?;
        tmp.write_all(bytes)?;
        tmp.flush()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    };
    write().map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))
}

fn same_file(a: &Path, b: &Path) -> bool {
    if a == b {
        return true;
    }
    match (std::fs::canonicalize(a), std::fs::canonicalize(b)) {
        (Ok(ca), Ok(cb)) => ca == cb,
        _ => false,
    }
}

fn ensure_distinct_output(out: &Path, inputs: &[&Path]) -> Result<(), Failure> {
    for input in inputs {
        if same_file(out, input) {
            return Err(Failure::precondition(format!(
                "output path {} would clobber input {}",
                out.display(),
                input.display()
            )));
        }
    }
    Ok(())
}

fn map_minimize_error(error: MinimizeError) -> Failure {
    let code = match &error {
        MinimizeError::Baseline(BaselineError::NondeterministicTarget { .. }) => {
            EXIT_NONDETERMINISTIC
        }
        MinimizeError::Baseline(_) => EXIT_PRECONDITION,
        MinimizeError::ZeroWorkers => EXIT_PRECONDITION,
    };
    Failure::new(code, error.to_string())
}

fn truncation_exit(truncation: Option<TruncationReason>) -> i32 {
    match truncation {
        None => EXIT_OK,
        Some(TruncationReason::Interrupted) => EXIT_INTERRUPTED,
        Some(_) => EXIT_TRUNCATED,
    }
}

fn default_trace_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".trace.jsonl");
    PathBuf::from(s)
}

// ---------------------------------------------------------------------------
// minimize
// ---------------------------------------------------------------------------

fn cmd_minimize(args: MinimizeArgs) -> CmdResult {
    let spec = build_target_spec(&args.target)?;
    let trace_path = args
        .trace
        .clone()
        .unwrap_or_else(|| default_trace_path(&args.out));
    ensure_distinct_output(&args.out, &[&args.crash, &args.pass])?;
    ensure_distinct_output(&trace_path, &[&args.crash, &args.pass])?;

    let crashing = read_input(&args.crash)?;
    let passing = read_input(&args.pass)?;

    let options = DiffMinOptions {
        workers: resolve_workers(args.workers).max(1),
        max_candidate_executions: args.budget.max_execs,
        max_wall_time: args.budget.max_wall_ms.map(std::time::Duration::from_millis),
        cancel: Some(sigint_flag()),
    };
    let trace = diffmin(&spec, &crashing, &passing, &options).map_err(map_minimize_error)?;

    write_atomic(&args.out, trace.final_input.as_slice())?;
    let mut trace_bytes = Vec::new();
    trace
        .write_jsonl(&mut trace_bytes)
        .map_err(|e| Failure::internal(format!("cannot serialize trace: {e}")))?;
    write_atomic(&trace_path, &trace_bytes)?;

    print_minimize_summary(&trace, &passing, &crashing);
    println!(
        "refined input written to {}, trace to {}",
        args.out.display(),
        trace_path.display()
    );
    Ok(truncation_exit(trace.truncation))
}

fn print_minimize_summary(trace: &MinimizationTrace, passing: &ByteInput, crashing: &ByteInput) {
    let original = alignment::levenshtein(passing, crashing);
    let final_dist = alignment::levenshtein(passing, &trace.final_input);
    let committed = trace
        .iterations
        .iter()
        .filter(|it| it.chosen_edit.is_some())
        .count();
    println!(
        "distance {original} -> {final_dist} ({committed} edits committed over {} iterations, {} executions, {} ms)",
        trace.iterations.len(),
        trace.total_executions,
        trace.wall_millis
    );
    if let Some(reason) = trace.truncation {
        println!("run truncated: {reason:?}");
    }
}

// ---------------------------------------------------------------------------
// ddmin
// ---------------------------------------------------------------------------

fn cmd_ddmin(args: DdminArgs) -> CmdResult {
    let spec = build_target_spec(&args.target)?;
    ensure_distinct_output(&args.out, &[&args.crash])?;
    let crashing = read_input(&args.crash)?;

    let options = DdminOptions {
        max_executions: args.budget.max_execs,
        max_wall_time: args.budget.max_wall_ms.map(std::time::Duration::from_millis),
        cancel: Some(sigint_flag()),
        verify_one_minimal: true,
    };
    let result = ddmin(&spec, &crashing, &options).map_err(map_minimize_error)?;

    write_atomic(&args.out, result.minimized.as_slice())?;
    println!(
        "minimized {} bytes -> {} bytes ({} executions, 1-minimal verified: {})",
        crashing.len(),
        result.minimized.len(),
        result.executions,
        match result.one_minimal_verified {
            Some(true) => "yes",
            Some(false) => "NO",
            None => "skipped",
        }
    );
    println!("minimized input written to {}", args.out.display());
    Ok(truncation_exit(result.truncation))
}

// ---------------------------------------------------------------------------
// distance
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PairDistance {
    distance: u64,
    passing_len: usize,
    crashing_len: usize,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SeedStats {
    seeds: usize,
    dist_original: StatRow,
    dist_refined: Option<StatRow>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StatRow {
    min: u64,
    avg: f64,
    max: u64,
}

fn stat_row(values: &[u64]) -> StatRow {
    let min = values.iter().copied().min().unwrap_or(0);
    let max = values.iter().copied().max().unwrap_or(0);
    let avg = if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<u64>() as f64 / values.len() as f64
    };
    StatRow { min, avg, max }
}

fn cmd_distance(args: DistanceArgs) -> CmdResult {
    let crash = read_input(&args.crash)?;
    let refined = args.refined.as_deref().map(read_input).transpose()?;

    if args.pass.is_dir() {
        let seeds = list_seed_files(&args.pass)?;
        if seeds.is_empty() {
            return Err(Failure::precondition(format!(
                "seed directory {} is empty",
                args.pass.display()
            )));
        }
        let mut originals = Vec::with_capacity(seeds.len());
        let mut refineds = Vec::with_capacity(seeds.len());
        for seed_path in &seeds {
            let seed = read_input(seed_path)?;
            originals.push(alignment::levenshtein(&seed, &crash) as u64);
            if let Some(r) = &refined {
                refineds.push(alignment::levenshtein(&seed, r) as u64);
            }
        }
        let stats = SeedStats {
            seeds: seeds.len(),
            dist_original: stat_row(&originals),
            dist_refined: refined.as_ref().map(|_| stat_row(&refineds)),
        };
        println!("row\tdistOriginal\tdistRefined");
        let fmt = |v: Option<&StatRow>, pick: fn(&StatRow) -> String| {
            v.map_or_else(|| "-".to_string(), pick)
        };
        println!(
            "min\t{}\t{}",
            stats.dist_original.min,
            fmt(stats.dist_refined.as_ref(), |r| r.min.to_string())
        );
        println!(
            "avg\t{:.1}\t{}",
            stats.dist_original.avg,
            fmt(stats.dist_refined.as_ref(), |r| format!("{:.1}", r.avg))
        );
        println!(
            "max\t{}\t{}",
            stats.dist_original.max,
            fmt(stats.dist_refined.as_ref(), |r| r.max.to_string())
        );
        println!("{}", to_json(&stats)?);
        return Ok(EXIT_OK);
    }

    let passing = read_input(&args.pass)?;
    match refined {
        Some(refined) => {
            let report = distance_report(&passing, &crash, &refined);
            println!(
                "distance to passing: original {} -> refined {}{}",
                report.dist_original,
                report.dist_refined,
                report
                    .ratio
                    .map_or_else(String::new, |r| format!(" (ratio {r:.3})"))
            );
            println!("{}", to_json(&report)?);
        }
        None => {
            let pair = PairDistance {
                distance: alignment::levenshtein(&passing, &crash) as u64,
                passing_len: passing.len(),
                crashing_len: crash.len(),
            };
            println!("distance {} (|pass|={}, |crash|={})", pair.distance, pair.passing_len, pair.crashing_len);
            println!("{}", to_json(&pair)?);
        }
    }
    Ok(EXIT_OK)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string(value).map_err(|e| Failure::internal(format!("json encoding: {e}")))
}

fn list_seed_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::internal(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.path())
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    Ok(files)
}

// ---------------------------------------------------------------------------
// sbfl
// ---------------------------------------------------------------------------

fn sbfl_failure(error: SbflError) -> Failure {
    let code = match error {
        SbflError::Io { .. } => EXIT_INTERNAL,
        _ => EXIT_PRECONDITION,
    };
    Failure::new(code, error.to_string())
}

fn read_buggy_elements(path: &Path) -> Result<BTreeSet<String>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::internal(format!("cannot read {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

fn cmd_sbfl(args: SbflArgs) -> CmdResult {
    if let Some(manifests) = &args.compare {
        let Some(buggy_path) = &args.buggy else {
            return Err(Failure::precondition(
                "--compare requires --buggy <file> naming the buggy elements",
            ));
        };
        let buggy = read_buggy_elements(buggy_path)?;
        let labels = ["fuzz", "ddmin", "diffmin"];
        let mut setups = Vec::with_capacity(manifests.len());
        for (label, path) in labels.iter().zip(manifests) {
            let spectrum = load_manifest(path).map_err(sbfl_failure)?;
            setups.push((label.to_string(), spectrum));
        }
        let report = compare_setups(&setups, &buggy).map_err(sbfl_failure)?;
        match args.format {
            OutputFormat::Tsv => print!("{}", report.to_tsv()),
            OutputFormat::Json => println!("{}", to_json(&report)?),
        }
        return Ok(EXIT_OK);
    }

    let manifest_path = args.manifest.as_ref().expect("clap enforces presence");
    let spectrum = load_manifest(manifest_path).map_err(sbfl_failure)?;
    let ranking = rank(&spectrum, args.granularity).map_err(sbfl_failure)?;

    let shown: Vec<_> = ranking.entries.iter().take(args.top).collect();
    match args.format {
        OutputFormat::Tsv => {
            println!("element\tscore\tbestRank\tworstRank");
            for entry in &shown {
                println!(
                    "{}\t{:.6}\t{}\t{}",
                    entry.element, entry.score, entry.best_rank, entry.worst_rank
                );
            }
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            #[serde(rename_all = "camelCase")]
            struct RankingOut<'a> {
                formula: &'a str,
                total_elements: usize,
                entries: Vec<&'a crate::sbfl::RankEntry>,
            }
            println!(
                "{}",
                to_json(&RankingOut {
                    formula: ranking.formula,
                    total_elements: ranking.entries.len(),
                    entries: shown.clone(),
                })?
            );
        }
    }

    if let Some(buggy_path) = &args.buggy {
        let buggy = read_buggy_elements(buggy_path)?;
        if buggy.is_empty() {
            return Err(Failure::precondition(format!(
                "buggy element file {} is empty",
                buggy_path.display()
            )));
        }
        println!("best buggy rank\t{}", ranking.best_rank_of_any(&buggy));
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// batch
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BatchSeedRow {
    seed: String,
    status: String,
    dist_original: Option<u64>,
    dist_refined: Option<u64>,
    iterations: Option<usize>,
    executions: Option<u64>,
    wall_millis: Option<u64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BatchSummary {
    rows: Vec<BatchSeedRow>,
    dist_original: StatRow,
    dist_refined: StatRow,
    total_executions: u64,
    total_wall_millis: u64,
}

fn cmd_batch(args: BatchArgs) -> CmdResult {
    let spec = build_target_spec(&args.target)?;
    let crashing = read_input(&args.crash)?;
    let seeds = list_seed_files(&args.seeds)?;
    if seeds.is_empty() {
        return Err(Failure::precondition(format!(
            "seed directory {} contains no files",
            args.seeds.display()
        )));
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::internal(format!("cannot create {}: {e}", args.out_dir.display())))?;

    let cancel = sigint_flag();
    let options = DiffMinOptions {
        workers: resolve_workers(args.workers).max(1),
        max_candidate_executions: args.budget.max_execs,
        max_wall_time: args.budget.max_wall_ms.map(std::time::Duration::from_millis),
        cancel: Some(cancel.clone()),
    };

    let mut rows = Vec::with_capacity(seeds.len());
    let mut originals = Vec::new();
    let mut refineds = Vec::new();
    let mut total_executions = 0u64;
    let mut total_wall = 0u64;
    let mut successes = 0usize;
    let mut interrupted = false;

    for seed_path in &seeds {
        let seed_name = seed_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| seed_path.display().to_string());
        if cancel.load(Ordering::SeqCst) {
            interrupted = true;
            rows.push(BatchSeedRow {
                seed: seed_name,
                status: "interrupted".into(),
                dist_original: None,
                dist_refined: None,
                iterations: None,
                executions: None,
                wall_millis: None,
            });
            continue;
        }
        let seed = match read_input(seed_path) {
            Ok(seed) => seed,
            Err(failure) => {
                rows.push(BatchSeedRow {
                    seed: seed_name,
                    status: format!("error: {}", failure.message),
                    dist_original: None,
                    dist_refined: None,
                    iterations: None,
                    executions: None,
                    wall_millis: None,
                });
                continue;
            }
        };
        match diffmin(&spec, &crashing, &seed, &options) {
            Ok(trace) => {
                let refined_path = args.out_dir.join(format!("{seed_name}.refined"));
                let trace_path = args.out_dir.join(format!("{seed_name}.trace.jsonl"));
                write_atomic(&refined_path, trace.final_input.as_slice())?;
                let mut trace_bytes = Vec::new();
                trace
                    .write_jsonl(&mut trace_bytes)
                    .map_err(|e| Failure::internal(format!("cannot serialize trace: {e}")))?;
                write_atomic(&trace_path, &trace_bytes)?;

                let dist_original = alignment::levenshtein(&seed, &crashing) as u64;
                let dist_refined = alignment::levenshtein(&seed, &trace.final_input) as u64;
                originals.push(dist_original);
                refineds.push(dist_refined);
                total_executions += trace.total_executions;
                total_wall += trace.wall_millis;
                successes += 1;
                if trace.truncation == Some(TruncationReason::Interrupted) {
                    interrupted = true;
                }
                rows.push(BatchSeedRow {
                    seed: seed_name,
                    status: match trace.truncation {
                        None => "ok".into(),
                        Some(reason) => format!("truncated: {reason:?}"),
                    },
                    dist_original: Some(dist_original),
                    dist_refined: Some(dist_refined),
                    iterations: Some(trace.iterations.len()),
                    executions: Some(trace.total_executions),
                    wall_millis: Some(trace.wall_millis),
                });
            }
            Err(error) => {
                rows.push(BatchSeedRow {
                    seed: seed_name,
                    status: format!("error: {error}"),
                    dist_original: None,
                    dist_refined: None,
                    iterations: None,
                    executions: None,
                    wall_millis: None,
                });
            }
        }
    }

    let summary = BatchSummary {
        dist_original: stat_row(&originals),
        dist_refined: stat_row(&refineds),
        total_executions,
        total_wall_millis: total_wall,
        rows,
    };
    let summary_path = args.out_dir.join("summary.json");
    write_atomic(&summary_path, to_json(&summary)?.as_bytes())?;

    println!("seed\tstatus\tdistOriginal\tdistRefined\titerations\texecutions\twallMillis");
    for row in &summary.rows {
        let opt = |v: Option<u64>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            row.seed,
            row.status,
            opt(row.dist_original),
            opt(row.dist_refined),
            row.iterations
                .map_or_else(|| "-".to_string(), |x| x.to_string()),
            opt(row.executions),
            opt(row.wall_millis),
        );
    }
    println!(
        "distOriginal min/avg/max\t{}\t{:.1}\t{}",
        summary.dist_original.min, summary.dist_original.avg, summary.dist_original.max
    );
    println!(
        "distRefined min/avg/max\t{}\t{:.1}\t{}",
        summary.dist_refined.min, summary.dist_refined.avg, summary.dist_refined.max
    );
    println!(
        "total executions {total_executions}, total wall {total_wall} ms, summary {}",
        summary_path.display()
    );

    if interrupted {
        Ok(EXIT_INTERRUPTED)
    } else if successes > 0 {
        Ok(EXIT_OK)
    } else {
        Err(Failure::precondition("no seed could be processed"))
    }
}

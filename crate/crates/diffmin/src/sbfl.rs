//! Spectrum-based fault localization with the Op2 formula.
//!
//! Coverage spectra are ingested from a JSON manifest plus per-test coverage
//! files (one `path:line` element per line) rather than collected in-process;
//! coverage instrumentation is compiler-specific and out of scope here.
//!
//! Scoring uses Op2, `ef - ep / (totalPass + 1)`, and reports both the best
//! (competition) and worst rank of every element so tie inflation stays
//! visible. Function-level scores aggregate member statements by maximum.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SbflError {
    #[error("op2 domain violation: {detail}")]
    Domain { detail: String },
    #[error("scoring requires at least one passing and one failing test")]
    NeedsBothVerdicts,
    #[error("duplicate test id {id:?}")]
    DuplicateTestId { id: String },
    #[error("function granularity requires a function map")]
    MissingFunctionMap,
    #[error("function map lacks entries for {count} element(s): {examples:?}")]
    UnmappedElements {
        count: usize,
        examples: Vec<String>,
    },
    #[error("buggy element set is empty")]
    EmptyBuggySet,
    #[error("manifest error: {detail}")]
    Manifest { detail: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Ranking granularity: individual statements (`path:line` elements) or the
/// functions they map to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Statement,
    Function,
}

impl std::str::FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "statement" => Ok(Self::Statement),
            "function" => Ok(Self::Function),
            other => Err(format!(
                "unknown granularity {other:?} (expected \"statement\" or \"function\")"
            )),
        }
    }
}

/// One test's coverage: which elements it touched and whether it passed.
#[derive(Debug, Clone)]
pub struct TestRecord {
    pub id: String,
    pub verdict: Verdict,
    pub covered: BTreeSet<String>,
}

/// Per-test coverage of code elements with pass/fail labels.
#[derive(Debug, Clone)]
pub struct CoverageSpectrum {
    tests: Vec<TestRecord>,
    elements: BTreeSet<String>,
    function_map: Option<BTreeMap<String, String>>,
}

impl CoverageSpectrum {
    /// Builds a spectrum. The element universe is the union of all covered
    /// elements. Test ids must be unique.
    pub fn new(
        tests: Vec<TestRecord>,
        function_map: Option<BTreeMap<String, String>>,
    ) -> Result<Self, SbflError> {
        let mut seen = BTreeSet::new();
        for test in &tests {
            if !seen.insert(test.id.clone()) {
                return Err(SbflError::DuplicateTestId {
                    id: test.id.clone(),
                });
            }
        }
        let elements = tests
            .iter()
            .flat_map(|t| t.covered.iter().cloned())
            .collect();
        Ok(Self {
            tests,
            elements,
            function_map,
        })
    }

    pub fn tests(&self) -> &[TestRecord] {
        &self.tests
    }

    pub fn elements(&self) -> &BTreeSet<String> {
        &self.elements
    }

    pub fn function_map(&self) -> Option<&BTreeMap<String, String>> {
        self.function_map.as_ref()
    }

    pub fn total_pass(&self) -> usize {
        self.tests
            .iter()
            .filter(|t| t.verdict == Verdict::Pass)
            .count()
    }

    pub fn total_fail(&self) -> usize {
        self.tests
            .iter()
            .filter(|t| t.verdict == Verdict::Fail)
            .count()
    }
}

/// Suspiciousness formula. Op2 drives all reports; Ochiai and Tarantula sit
/// behind the same interface for exploratory use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SbflFormula {
    #[default]
    Op2,
    Ochiai,
    Tarantula,
}

impl SbflFormula {
    pub fn name(self) -> &'static str {
        match self {
            Self::Op2 => "op2",
            Self::Ochiai => "ochiai",
            Self::Tarantula => "tarantula",
        }
    }

    /// Scores one element from its coverage counts.
    pub fn score(
        self,
        ef: usize,
        ep: usize,
        total_fail: usize,
        total_pass: usize,
    ) -> Result<f64, SbflError> {
        if total_fail < 1 {
            return Err(SbflError::Domain {
                detail: format!("totalFail must be >= 1, got {total_fail}"),
            });
        }
        if ef > total_fail {
            return Err(SbflError::Domain {
                detail: format!("ef={ef} exceeds totalFail={total_fail}"),
            });
        }
        if ep > total_pass {
            return Err(SbflError::Domain {
                detail: format!("ep={ep} exceeds totalPass={total_pass}"),
            });
        }
        let (ef, ep) = (ef as f64, ep as f64);
        let (nf, np) = (total_fail as f64, total_pass as f64);
        Ok(match self {
            Self::Op2 => ef - ep / (np + 1.0),
            Self::Ochiai => {
                let denom = (nf * (ef + ep)).sqrt();
                if denom == 0.0 {
                    0.0
                } else {
                    ef / denom
                }
            }
            Self::Tarantula => {
                let fail_ratio = ef / nf;
                let pass_ratio = if np > 0.0 { ep / np } else { 0.0 };
                let denom = fail_ratio + pass_ratio;
                if denom == 0.0 {
                    0.0
                } else {
                    fail_ratio / denom
                }
            }
        })
    }
}

impl std::str::FromStr for SbflFormula {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "op2" => Ok(Self::Op2),
            "ochiai" => Ok(Self::Ochiai),
            "tarantula" => Ok(Self::Tarantula),
            other => Err(format!(
                "unknown formula {other:?} (expected \"op2\", \"ochiai\", or \"tarantula\")"
            )),
        }
    }
}

/// Op2 suspiciousness: `ef - ep / (totalPass + 1)`.
///
/// `ef`/`ep` count failing/passing tests covering the element.
pub fn op2_score(
    ef: usize,
    ep: usize,
    total_fail: usize,
    total_pass: usize,
) -> Result<f64, SbflError> {
    SbflFormula::Op2.score(ef, ep, total_fail, total_pass)
}

/// One ranked element.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RankEntry {
    pub element: String,
    pub score: f64,
    /// Competition rank: 1 + number of strictly higher-scored elements.
    pub best_rank: u64,
    /// Number of elements scoring at least this entry's score.
    pub worst_rank: u64,
}

/// Elements (or functions) ordered by decreasing suspiciousness.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuspiciousnessRanking {
    pub entries: Vec<RankEntry>,
    pub formula: &'static str,
}

impl SuspiciousnessRanking {
    /// Best rank of any of the given elements; elements absent from the
    /// ranking count as `len + 1` (unranked).
    pub fn best_rank_of_any(&self, wanted: &BTreeSet<String>) -> u64 {
        let unranked = self.entries.len() as u64 + 1;
        wanted
            .iter()
            .map(|w| {
                self.entries
                    .iter()
                    .find(|e| &e.element == w)
                    .map_or(unranked, |e| e.best_rank)
            })
            .min()
            .unwrap_or(unranked)
    }
}

/// Scores and ranks every element of the spectrum at the given granularity,
/// using Op2.
pub fn rank(
    spectrum: &CoverageSpectrum,
    granularity: Granularity,
) -> Result<SuspiciousnessRanking, SbflError> {
    rank_with_formula(spectrum, granularity, SbflFormula::Op2)
}

/// [`rank`] generalized over the scoring formula.
pub fn rank_with_formula(
    spectrum: &CoverageSpectrum,
    granularity: Granularity,
    formula: SbflFormula,
) -> Result<SuspiciousnessRanking, SbflError> {
    let total_pass = spectrum.total_pass();
    let total_fail = spectrum.total_fail();
    if total_pass == 0 || total_fail == 0 {
        return Err(SbflError::NeedsBothVerdicts);
    }

    // Statement-level scores over the whole universe; elements covered by no
    // test score 0.
    let mut statement_scores: BTreeMap<&str, f64> = BTreeMap::new();
    for element in spectrum.elements() {
        let mut ef = 0usize;
        let mut ep = 0usize;
        for test in spectrum.tests() {
            if test.covered.contains(element) {
                match test.verdict {
                    Verdict::Fail => ef += 1,
                    Verdict::Pass => ep += 1,
                }
            }
        }
        statement_scores.insert(element, formula.score(ef, ep, total_fail, total_pass)?);
    }

    let scored: Vec<(String, f64)> = match granularity {
        Granularity::Statement => statement_scores
            .into_iter()
            .map(|(element, score)| (element.to_string(), score))
            .collect(),
        Granularity::Function => {
            let map = spectrum
                .function_map()
                .ok_or(SbflError::MissingFunctionMap)?;
            let unmapped: Vec<String> = spectrum
                .elements()
                .iter()
                .filter(|e| !map.contains_key(*e))
                .cloned()
                .collect();
            if !unmapped.is_empty() {
                return Err(SbflError::UnmappedElements {
                    count: unmapped.len(),
                    examples: unmapped.into_iter().take(8).collect(),
                });
            }
            let mut function_scores: BTreeMap<String, f64> = BTreeMap::new();
            for (element, score) in statement_scores {
                let function = &map[element];
                function_scores
                    .entry(function.clone())
                    .and_modify(|s| *s = s.max(score))
                    .or_insert(score);
            }
            function_scores.into_iter().collect()
        }
    };

    Ok(build_ranking(scored, formula))
}

fn build_ranking(mut scored: Vec<(String, f64)>, formula: SbflFormula) -> SuspiciousnessRanking {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut entries = Vec::with_capacity(scored.len());
    let mut start = 0usize;
    while start < scored.len() {
        let mut end = start + 1;
        while end < scored.len() && scored[end].1 == scored[start].1 {
            end += 1;
        }
        for (element, score) in scored[start..end].iter().cloned() {
            entries.push(RankEntry {
                element,
                score,
                best_rank: start as u64 + 1,
                worst_rank: end as u64,
            });
        }
        start = end;
    }
    SuspiciousnessRanking {
        entries,
        formula: formula.name(),
    }
}

/// Best buggy-element ranks for one labeled setup.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SetupBestRanks {
    pub setup: String,
    pub statement_best_rank: u64,
    /// Absent when the setup's spectrum has no complete function map.
    pub function_best_rank: Option<u64>,
}

/// The Op2 comparison across evaluation setups (e.g. fuzz / ddmin / refined).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonReport {
    pub rows: Vec<SetupBestRanks>,
}

impl ComparisonReport {
    /// Tab-separated rendering: one row per setup, columns per granularity.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("setup\tstatement\tfunction\n");
        for row in &self.rows {
            let function = row
                .function_best_rank
                .map_or_else(|| "-".to_string(), |r| r.to_string());
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                row.setup, row.statement_best_rank, function
            ));
        }
        out
    }
}

/// Ranks each setup's spectrum and reports the best rank any buggy element
/// achieves, at statement level and (where a function map permits) function
/// level.
///
/// A buggy element missing from a spectrum's universe is unranked there and
/// counts as `universe size + 1`.
pub fn compare_setups(
    setups: &[(String, CoverageSpectrum)],
    buggy_elements: &BTreeSet<String>,
) -> Result<ComparisonReport, SbflError> {
    if buggy_elements.is_empty() {
        return Err(SbflError::EmptyBuggySet);
    }
    let mut rows = Vec::with_capacity(setups.len());
    for (name, spectrum) in setups {
        let statement = rank(spectrum, Granularity::Statement)?;
        let statement_best_rank = statement.best_rank_of_any(buggy_elements);

        let function_best_rank = match spectrum.function_map() {
            Some(map) => match rank(spectrum, Granularity::Function) {
                Ok(function_ranking) => {
                    let buggy_functions: BTreeSet<String> = buggy_elements
                        .iter()
                        .filter_map(|e| map.get(e).cloned())
                        .collect();
                    Some(function_ranking.best_rank_of_any(&buggy_functions))
                }
                Err(SbflError::UnmappedElements { .. }) => None,
                Err(other) => return Err(other),
            },
            None => None,
        };

        rows.push(SetupBestRanks {
            setup: name.clone(),
            statement_best_rank,
            function_best_rank,
        });
    }
    Ok(ComparisonReport { rows })
}

// ---------------------------------------------------------------------------
// Manifest ingestion
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    tests: Vec<ManifestTest>,
    #[serde(rename = "functionMap")]
    function_map: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestTest {
    id: String,
    verdict: String,
    #[serde(rename = "coverageFile")]
    coverage_file: String,
}

/// Loads a spectrum manifest.
///
/// The manifest is a JSON document
/// `{"tests": [{"id", "verdict": "pass"|"fail", "coverageFile"}], "functionMap"?}`.
/// Coverage files hold one element id per line; the function map file holds
/// `element<TAB>functionId` lines. All paths are relative to the manifest.
pub fn load_manifest(path: &Path) -> Result<CoverageSpectrum, SbflError> {
    let text = std::fs::read_to_string(path).map_err(|source| SbflError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let doc: ManifestDoc = serde_json::from_str(&text).map_err(|e| SbflError::Manifest {
        detail: format!("{}: {e}", path.display()),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let mut tests = Vec::with_capacity(doc.tests.len());
    for test in doc.tests {
        let verdict = match test.verdict.as_str() {
            "pass" => Verdict::Pass,
            "fail" => Verdict::Fail,
            other => {
                return Err(SbflError::Manifest {
                    detail: format!(
                        "test {:?}: verdict must be \"pass\" or \"fail\", got {other:?}",
                        test.id
                    ),
                })
            }
        };
        let coverage_path = base.join(&test.coverage_file);
        let coverage = std::fs::read_to_string(&coverage_path).map_err(|source| SbflError::Io {
            path: coverage_path.display().to_string(),
            source,
        })?;
        let covered = coverage
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        tests.push(TestRecord {
            id: test.id,
            verdict,
            covered,
        });
    }

    let function_map = match doc.function_map {
        Some(rel) => {
            let map_path = base.join(&rel);
            let text = std::fs::read_to_string(&map_path).map_err(|source| SbflError::Io {
                path: map_path.display().to_string(),
                source,
            })?;
            let mut map = BTreeMap::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim_end();
                if line.is_empty() {
                    continue;
                }
                let Some((element, function)) = line.split_once('\t') else {
                    return Err(SbflError::Manifest {
                        detail: format!(
                            "{}:{}: expected \"element<TAB>functionId\"",
                            map_path.display(),
                            lineno + 1
                        ),
                    });
                };
                map.insert(element.to_string(), function.to_string());
            }
            Some(map)
        }
        None => None,
    };

    CoverageSpectrum::new(tests, function_map)
}

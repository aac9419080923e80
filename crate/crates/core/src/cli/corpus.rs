use std::path::Path;

use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::{build_view, display_path, read_source, sibling_path, write_view_files, CliError, EXIT_ERROR, EXIT_NOT_EQUIVALENT, EXIT_OK};
use crate::analysis::{score_number, CLConfig};

/// Stack for worker threads; the parser and interpreter recurse.
const WORKER_STACK: usize = 256 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRow {
    pub path: String,
    pub score_before: Option<f64>,
    pub score_after: Option<f64>,
    pub applied_count: usize,
    pub equivalence_failures: usize,
    /// Diagnostic line when the file could not be processed.
    pub error: Option<String>,
}

impl Serialize for CorpusRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("path", &self.path)?;
        map.serialize_entry("score_before", &self.score_before.map(score_number))?;
        map.serialize_entry("score_after", &self.score_after.map(score_number))?;
        map.serialize_entry("applied_count", &self.applied_count)?;
        map.serialize_entry("equivalence_failures", &self.equivalence_failures)?;
        if let Some(e) = &self.error {
            map.serialize_entry("error", e)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusAggregates {
    /// Files processed without error.
    pub file_count: usize,
    pub mean_score_reduction: f64,
    pub percent_zero_after: f64,
}

impl Serialize for CorpusAggregates {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(3))?;
        map.serialize_entry("file_count", &self.file_count)?;
        map.serialize_entry("mean_score_reduction", &score_number(self.mean_score_reduction))?;
        map.serialize_entry("percent_zero_after", &score_number(self.percent_zero_after))?;
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub files: Vec<CorpusRow>,
    pub aggregates: CorpusAggregates,
}

impl CorpusAggregates {
    pub fn from_rows(rows: &[CorpusRow]) -> Self {
        let scored: Vec<(f64, f64)> =
            rows.iter().filter_map(|r| Some((r.score_before?, r.score_after?))).collect();
        let n = scored.len();
        if n == 0 {
            return CorpusAggregates { file_count: 0, mean_score_reduction: 0.0, percent_zero_after: 0.0 };
        }
        let reduction: f64 = scored.iter().map(|(b, a)| b - a).sum();
        let zero = scored.iter().filter(|(_, a)| *a == 0.0).count();
        CorpusAggregates {
            file_count: n,
            mean_score_reduction: reduction / n as f64,
            percent_zero_after: 100.0 * zero as f64 / n as f64,
        }
    }
}

impl CorpusSummary {
    pub fn exit_code(&self) -> i32 {
        if self.files.iter().any(|r| r.error.is_some()) {
            EXIT_ERROR
        } else if self.files.iter().any(|r| r.equivalence_failures > 0) {
            EXIT_NOT_EQUIVALENT
        } else {
            EXIT_OK
        }
    }
}

/// Corpus inputs: `*.mpy` files directly in `dir`, views excluded, by path.
pub fn corpus_files(dir: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let io = |e: std::io::Error| CliError::Io { path: display_path(dir), message: e.to_string() };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if path.is_file() && name.ends_with(".mpy") && !name.ends_with(".view.mpy") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn process(path: &Path, cfg: &CLConfig, check: bool, out_dir: Option<&Path>) -> CorpusRow {
    let mut row = CorpusRow {
        path: display_path(path),
        score_before: None,
        score_after: None,
        applied_count: 0,
        equivalence_failures: 0,
        error: None,
    };
    let result = read_source(path).and_then(|unit| {
        let outcome = build_view(&unit, cfg, check)?;
        if let Some(dir) = out_dir {
            let name = path.file_name().expect("corpus entries are files");
            let view_path = sibling_path(&dir.join(name), ".view.mpy");
            write_view_files(&outcome, &view_path, &sibling_path(&view_path, ".map.json"))?;
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            row.score_before = Some(outcome.view.report_before.composite_score);
            row.score_after = Some(outcome.view.report_after.composite_score);
            row.applied_count = outcome.trace.applied_count();
            row.equivalence_failures = outcome.trace.equivalence_failures() + usize::from(!outcome.final_check_passed);
        }
        Err(e) => row.error = Some(e.diagnostic()),
    }
    row
}

/// Runs the view pipeline over every corpus file in parallel. Rows come back
/// ordered by path whatever the completion order.
pub fn corpus_summary(dir: &Path, cfg: &CLConfig, check: bool, out_dir: Option<&Path>) -> Result<CorpusSummary, CliError> {
    let files = corpus_files(dir)?;
    if let Some(d) = out_dir {
        std::fs::create_dir_all(d).map_err(|e| CliError::Io { path: display_path(d), message: e.to_string() })?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .stack_size(WORKER_STACK)
        .build()
        .map_err(|e| CliError::Io { path: display_path(dir), message: e.to_string() })?;
    let files_ref = &files;
    let rows: Vec<CorpusRow> =
        pool.install(|| files_ref.par_iter().map(|p| process(p, cfg, check, out_dir)).collect());
    let aggregates = CorpusAggregates::from_rows(&rows);
    Ok(CorpusSummary { files: rows, aggregates })
}

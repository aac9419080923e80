use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::callgraph::call_depth;
use super::liveness::{liveness, module_liveness};
use super::nesting::{nesting_profile, MODULE_SCOPE};
use super::{AnalysisError, CLConfig};
use crate::syntax::{FunctionDef, ModuleAst, SourceUnit};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionMetrics {
    pub name: String,
    pub max_nesting: usize,
    pub mean_nesting: f64,
    pub peak_live: usize,
    pub overload_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallSummary {
    pub max_depth: usize,
    pub recursive: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OverlongLine {
    pub line: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricGroups {
    pub intrinsic: Vec<&'static str>,
    pub extraneous: Vec<&'static str>,
}

impl Default for MetricGroups {
    fn default() -> Self {
        MetricGroups {
            intrinsic: vec!["max_nesting", "mean_nesting", "peak_live", "overload_count", "call_max_depth"],
            extraneous: vec!["overlong_lines"],
        }
    }
}

/// Every load metric of one source unit plus the weighted composite score.
#[derive(Debug, Clone, PartialEq)]
pub struct CognitiveLoadReport {
    pub file: String,
    pub composite_score: f64,
    pub capacity: usize,
    pub line_limit: usize,
    pub functions: Vec<FunctionMetrics>,
    pub call: CallSummary,
    pub overlong_lines: Vec<OverlongLine>,
    pub groups: MetricGroups,
}

impl CognitiveLoadReport {
    pub fn max_nesting(&self) -> usize {
        self.functions.iter().map(|f| f.max_nesting).max().unwrap_or(0)
    }

    pub fn total_overload(&self) -> usize {
        self.functions.iter().map(|f| f.overload_count).sum()
    }

    pub fn function(&self, name: &str) -> Option<&FunctionMetrics> {
        self.functions.iter().find(|f| f.name == name)
    }
}

impl Serialize for CognitiveLoadReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(8))?;
        map.serialize_entry("file", &self.file)?;
        map.serialize_entry("composite_score", &score_number(self.composite_score))?;
        map.serialize_entry("capacity", &self.capacity)?;
        map.serialize_entry("line_limit", &self.line_limit)?;
        map.serialize_entry("functions", &self.functions)?;
        map.serialize_entry("call", &self.call)?;
        map.serialize_entry("overlong_lines", &self.overlong_lines)?;
        map.serialize_entry("groups", &self.groups)?;
        map.end()
    }
}

/// Integral scores serialize as JSON integers.
pub fn score_number(score: f64) -> serde_json::Number {
    if score.fract() == 0.0 && score.abs() < 9.0e15 {
        serde_json::Number::from(score as i64)
    } else {
        serde_json::Number::from_f64(score).unwrap_or_else(|| serde_json::Number::from(0))
    }
}

/// Lines of `source` longer than `limit` code points, indentation included.
pub fn overlong_lines(source: &SourceUnit, limit: usize) -> Vec<OverlongLine> {
    source
        .lines()
        .iter()
        .enumerate()
        .filter_map(|(i, text)| {
            let length = text.chars().count();
            (length > limit).then_some(OverlongLine { line: i + 1, length })
        })
        .collect()
}

fn live_stats(f: &FunctionDef, capacity: usize) -> (usize, usize) {
    let l = liveness(f, capacity);
    let (mut peak, mut over) = (l.peak_live, l.overload_points.len());
    for inner in f.nested() {
        let (p, o) = live_stats(inner, capacity);
        peak = peak.max(p);
        over += o;
    }
    (peak, over)
}

pub fn cl_report(module: &ModuleAst, source: &SourceUnit, cfg: &CLConfig) -> Result<CognitiveLoadReport, AnalysisError> {
    let calls = call_depth(module)?;
    let mut functions = Vec::new();
    for row in nesting_profile(module) {
        let (peak_live, overload_count) = if row.name == MODULE_SCOPE {
            let l = module_liveness(module, cfg.capacity);
            (l.peak_live, l.overload_points.len())
        } else {
            let f = module.function(&row.name).expect("profile rows name top-level functions");
            live_stats(f, cfg.capacity)
        };
        functions.push(FunctionMetrics {
            name: row.name,
            max_nesting: row.max_nesting,
            mean_nesting: row.mean_nesting,
            peak_live,
            overload_count,
        });
    }
    let overlong = overlong_lines(source, cfg.line_limit);

    let nest_excess: usize = functions.iter().map(|f| f.max_nesting.saturating_sub(1)).sum();
    let overloads: usize = functions.iter().map(|f| f.overload_count).sum();
    let call_excess = calls.max_depth.saturating_sub(cfg.depth_budget);
    let composite_score = cfg.w_nest * nest_excess as f64
        + cfg.w_wm * overloads as f64
        + cfg.w_call * call_excess as f64
        + cfg.w_line * overlong.len() as f64;

    Ok(CognitiveLoadReport {
        file: source.path.clone(),
        composite_score,
        capacity: cfg.capacity,
        line_limit: cfg.line_limit,
        functions,
        call: CallSummary { max_depth: calls.max_depth, recursive: calls.recursive.into_iter().collect() },
        overlong_lines: overlong,
        groups: MetricGroups::default(),
    })
}

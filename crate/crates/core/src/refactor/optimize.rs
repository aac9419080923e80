use std::collections::BTreeSet;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::{apply_transformation, rendered_score, scored_candidates, TransformKind, TransformationCandidate};
use crate::analysis::{score_number, CLConfig};
use crate::interp::check_equivalence;
use crate::syntax::{tokenize, ModuleAst, SourceUnit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Applied,
    Rejected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub kind: TransformKind,
    pub site: String,
    pub score_before: f64,
    pub score_after: f64,
    pub status: TraceStatus,
    /// `no-improvement` or `equivalence-failure` for rejections.
    pub reason: Option<String>,
}

impl Serialize for TraceEntry {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(6))?;
        map.serialize_entry("kind", &self.kind)?;
        map.serialize_entry("site", &self.site)?;
        map.serialize_entry("score_before", &score_number(self.score_before))?;
        map.serialize_entry("score_after", &score_number(self.score_after))?;
        map.serialize_entry("status", &self.status)?;
        map.serialize_entry("reason", &self.reason)?;
        map.end()
    }
}

/// Audit log of one optimization run. Serializes as the list of entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OptimizeTrace {
    pub entries: Vec<TraceEntry>,
    pub iterations: usize,
}

impl OptimizeTrace {
    pub fn applied(&self) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter().filter(|e| e.status == TraceStatus::Applied)
    }

    pub fn applied_count(&self) -> usize {
        self.applied().count()
    }

    pub fn equivalence_failures(&self) -> usize {
        self.entries.iter().filter(|e| e.reason.as_deref() == Some(EQUIVALENCE_FAILURE)).count()
    }
}

impl Serialize for OptimizeTrace {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

pub const NO_IMPROVEMENT: &str = "no-improvement";
pub const EQUIVALENCE_FAILURE: &str = "equivalence-failure";

fn entry(c: &TransformationCandidate, before: f64, status: TraceStatus, reason: Option<&str>) -> TraceEntry {
    TraceEntry {
        kind: c.kind,
        site: c.site_label(),
        score_before: before,
        score_after: before + c.predicted_delta,
        status,
        reason: reason.map(str::to_string),
    }
}

/// Greedy optimization with every step checked against `module`.
pub fn optimize(module: &ModuleAst, source: &SourceUnit, cfg: &CLConfig) -> (ModuleAst, OptimizeTrace) {
    optimize_with(module, source, cfg, true)
}

/// Greedy loop: apply the candidate with the largest strict score decrease
/// (ties by kind, then document order) until none improves or
/// `cfg.max_iters` rounds have run. With `check` set, each step must pass
/// the differential oracle against the input module; a failing candidate is
/// never tried again.
pub fn optimize_with(module: &ModuleAst, source: &SourceUnit, cfg: &CLConfig, check: bool) -> (ModuleAst, OptimizeTrace) {
    let comments = tokenize(source).map(|l| l.comments).unwrap_or_default();
    let mut trace = OptimizeTrace::default();
    let mut current = module.clone();
    let Some(mut score) = rendered_score(&current, &comments, cfg) else { return (current, trace) };
    let mut rejected: BTreeSet<String> = BTreeSet::new();

    while trace.iterations < cfg.max_iters {
        trace.iterations += 1;
        let candidates: Vec<TransformationCandidate> =
            scored_candidates(&current, &comments, cfg).into_iter().filter(|c| !rejected.contains(&c.key())).collect();
        // stable sort keeps document order among equal (delta, kind)
        let mut improving: Vec<&TransformationCandidate> = candidates.iter().filter(|c| c.predicted_delta < 0.0).collect();
        improving.sort_by(|a, b| a.predicted_delta.total_cmp(&b.predicted_delta).then(a.kind.cmp(&b.kind)));
        let Some(best) = improving.first() else {
            for c in &candidates {
                trace.entries.push(entry(c, score, TraceStatus::Rejected, Some(NO_IMPROVEMENT)));
            }
            break;
        };
        let next = apply_transformation(&current, best).expect("scored candidates apply");
        if check && !check_equivalence(module, &next, cfg).equivalent {
            rejected.insert(best.key());
            trace.entries.push(entry(best, score, TraceStatus::Rejected, Some(EQUIVALENCE_FAILURE)));
            continue;
        }
        trace.entries.push(entry(best, score, TraceStatus::Applied, None));
        score += best.predicted_delta;
        current = next;
    }
    (current, trace)
}

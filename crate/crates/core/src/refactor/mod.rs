//! The transformation catalog (guard clauses, loop continues, lifting and
//! inlining functions, splitting variable webs) and the greedy optimizer
//! that applies it.

mod apply;
mod optimize;
mod path;
mod webs;

pub use apply::apply_transformation;
pub use optimize::{optimize, optimize_with, OptimizeTrace, TraceEntry, TraceStatus};
pub use path::{enclosing_function, preorder, resolve, NodePath, NodeRef};

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{call_depth, CLConfig, Cfg, CallGraphInfo, BUILTINS};
use crate::emit::view_report;
use crate::syntax::{
    parse_source, print_ast, Comment, ExprKind, FunctionDef, Item, ModuleAst, SourceUnit, Stmt, StmtKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TransformKind {
    GuardClause,
    LoopContinue,
    LiftNested,
    InlineSingleCall,
    SplitWebs,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformationCandidate {
    pub kind: TransformKind,
    pub site: NodePath,
    /// Callee for InlineSingleCall, variable for SplitWebs.
    pub target: Option<String>,
    /// Score change if applied; recomputed on every enumeration.
    pub predicted_delta: f64,
    /// Canonical text of the node at `site` when enumerated.
    pub fingerprint: String,
}

impl TransformationCandidate {
    pub fn site_label(&self) -> String {
        match &self.target {
            Some(t) => format!("{}:{t}", self.site),
            None => self.site.to_string(),
        }
    }

    /// Identity used to remember rejections across iterations.
    pub fn key(&self) -> String {
        format!("{}|{}|{}", self.kind, self.site_label(), self.fingerprint)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefactorError {
    #[error("{kind} candidate at {site} no longer matches the module")]
    StaleCandidate { kind: TransformKind, site: String },
    #[error("no free name derived from '{base}'")]
    NameCollisionExhausted { base: String },
}

/// Canonical text of the node at `path`, used to detect stale candidates.
pub fn fingerprint(m: &ModuleAst, path: &NodePath) -> Option<String> {
    let item = match resolve(m, path)? {
        NodeRef::Function(f) => Item::Function(f.clone()),
        NodeRef::Stmt(s) => Item::Stmt(s.clone()),
    };
    Some(print_ast(&ModuleAst { items: vec![item] }))
}

/// The two branches of a tail `if` viewed as `if c: THEN else: ELSE`, with
/// an `elif` chain read as a nested `if` in the else branch.
pub(crate) fn guard_branches(s: &Stmt) -> Option<(&[Stmt], Vec<Stmt>)> {
    let StmtKind::If { arms, else_block } = &s.kind else { return None };
    let then = arms[0].1.as_slice();
    let rest = if arms.len() > 1 {
        let tail = StmtKind::If { arms: arms[1..].to_vec(), else_block: else_block.clone() };
        vec![Stmt::new(tail, arms[1].0.span)]
    } else {
        else_block.clone()?
    };
    Some((then, rest))
}

fn is_guard_site(m: &ModuleAst, path: &NodePath, s: &Stmt) -> bool {
    let Some(parent) = enclosing_function(m, path) else { return false };
    if parent.0.len() + 1 != path.0.len() {
        return false;
    }
    let Some(NodeRef::Function(f)) = resolve(m, &parent) else { return false };
    if *path.0.last().expect("non-empty") + 1 != f.body.len() {
        return false;
    }
    match guard_branches(s) {
        Some((then, rest)) => crate::syntax::block_ends_in_return(then) || crate::syntax::block_ends_in_return(&rest),
        None => false,
    }
}

fn is_loop_tail_if(m: &ModuleAst, path: &NodePath, s: &Stmt) -> bool {
    let StmtKind::If { arms, else_block: None } = &s.kind else { return false };
    if arms.len() != 1 || path.0.len() < 3 {
        return false;
    }
    let n = path.0.len();
    let parent = NodePath(path.0[..n - 2].to_vec());
    match resolve(m, &parent) {
        Some(NodeRef::Stmt(p)) => match &p.kind {
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => path.0[n - 1] + 1 == body.len(),
            _ => false,
        },
        _ => false,
    }
}

/// Top-level, non-recursive, straight-line function called exactly once.
pub(crate) fn inline_eligible<'a>(m: &'a ModuleAst, calls: &CallGraphInfo, name: &str) -> Option<&'a FunctionDef> {
    let f = m.function(name)?;
    if name == "main" || calls.recursive.contains(name) || calls.call_count(name) != 1 {
        return None;
    }
    let stmts: Vec<&Stmt> = f.body.iter().map(Item::as_stmt).collect::<Option<_>>()?;
    let (last, init) = stmts.split_last()?;
    if !matches!(last.kind, StmtKind::Return(_)) {
        return None;
    }
    let straight = init.iter().all(|s| matches!(s.kind, StmtKind::Assign { .. } | StmtKind::Expr(_) | StmtKind::Pass));
    straight.then_some(f)
}

/// The call of a statement that is a bare call or assigns a call's result.
pub(crate) fn statement_call(s: &Stmt) -> Option<(&str, usize)> {
    let e = match &s.kind {
        StmtKind::Expr(e) | StmtKind::Assign { value: e, .. } => e,
        _ => return None,
    };
    match &e.kind {
        ExprKind::Call(name, args) => Some((name, args.len())),
        _ => None,
    }
}

pub(crate) fn called_names(f: &FunctionDef) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in f.statements() {
        s.walk(&mut |s| {
            for e in s.exprs() {
                e.walk(&mut |e| {
                    if let ExprKind::Call(n, _) = &e.kind {
                        out.insert(n.clone());
                    }
                });
            }
        });
    }
    out
}

pub(crate) fn is_inline_site(m: &ModuleAst, calls: &CallGraphInfo, path: &NodePath, s: &Stmt) -> Option<String> {
    let (name, argc) = statement_call(s)?;
    let callee = inline_eligible(m, calls, name)?;
    if callee.params.len() != argc {
        return None;
    }
    if let Some(scope) = enclosing_function(m, path) {
        let Some(NodeRef::Function(f)) = resolve(m, &scope) else { return None };
        // the call must reach the top-level function, and the callee's own
        // calls must not be captured by the call site's nested definitions
        if f.nested_named(name).is_some() || called_names(callee).iter().any(|c| f.nested_named(c).is_some()) {
            return None;
        }
    }
    Some(name.to_string())
}

/// Variables of a scope whose def-use chains form two or more webs.
fn splittable(params: &[String], stmts: &[&Stmt]) -> Vec<String> {
    let cfg = Cfg::build(params, stmts);
    let taken = webs::names_in(params, stmts);
    cfg.locals
        .iter()
        .filter(|v| {
            webs::plan(&cfg, v, params.contains(v), &taken).is_some_and(|p| p.webs >= 2)
        })
        .cloned()
        .collect()
}

/// Candidates without scores, in document order then kind order.
pub fn raw_candidates(m: &ModuleAst) -> Vec<TransformationCandidate> {
    let calls = call_depth(m).ok();
    let mut out = Vec::new();
    let push = |out: &mut Vec<TransformationCandidate>, kind, site: &NodePath, target: Option<String>| {
        let fingerprint = fingerprint(m, site).unwrap_or_default();
        out.push(TransformationCandidate { kind, site: site.clone(), target, predicted_delta: 0.0, fingerprint });
    };

    let top: Vec<&Stmt> = m.top_level_statements().collect();
    for var in splittable(&[], &top) {
        push(&mut out, TransformKind::SplitWebs, &NodePath::default(), Some(var));
    }
    for (path, node) in preorder(m) {
        match node {
            NodeRef::Stmt(s) => {
                if is_guard_site(m, &path, s) {
                    push(&mut out, TransformKind::GuardClause, &path, None);
                }
                if is_loop_tail_if(m, &path, s) {
                    push(&mut out, TransformKind::LoopContinue, &path, None);
                }
                if let Some(callee) = calls.as_ref().and_then(|c| is_inline_site(m, c, &path, s)) {
                    push(&mut out, TransformKind::InlineSingleCall, &path, Some(callee));
                }
            }
            NodeRef::Function(f) => {
                if path.0.len() > 1 {
                    push(&mut out, TransformKind::LiftNested, &path, None);
                }
                let stmts: Vec<&Stmt> = f.statements().collect();
                for var in splittable(&f.params, &stmts) {
                    push(&mut out, TransformKind::SplitWebs, &path, Some(var));
                }
            }
        }
    }
    out
}

/// Score of `m` as rendered, or None when the rendering does not read back
/// as `m` (the candidate that produced it is then unusable).
pub(crate) fn rendered_score(m: &ModuleAst, comments: &[Comment], cfg: &CLConfig) -> Option<f64> {
    let (rendered, report) = view_report(m, comments, "<view>", cfg).ok()?;
    let back = parse_source(&SourceUnit::new("<view>", rendered.text())).ok()?;
    back.structurally_eq(m).then_some(report.composite_score)
}

pub(crate) fn scored_candidates(m: &ModuleAst, comments: &[Comment], cfg: &CLConfig) -> Vec<TransformationCandidate> {
    let Some(base) = rendered_score(m, comments, cfg) else { return Vec::new() };
    raw_candidates(m)
        .into_iter()
        .filter_map(|mut c| {
            let next = apply_transformation(m, &c).ok()?;
            c.predicted_delta = rendered_score(&next, comments, cfg)? - base;
            Some(c)
        })
        .collect()
}

/// Every applicable transformation of `m` with its score change.
pub fn enumerate_candidates(m: &ModuleAst, cfg: &CLConfig) -> Vec<TransformationCandidate> {
    scored_candidates(m, &[], cfg)
}

/// Whether `name` would clash with a function or builtin once at top level.
pub(crate) fn clashes_at_top(m: &ModuleAst, name: &str) -> bool {
    BUILTINS.contains(&name) || m.function(name).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn module(src: &str) -> ModuleAst {
        parse_source(&SourceUnit::new("t.mpy", src)).unwrap()
    }

    fn kinds(src: &str) -> Vec<(TransformKind, String)> {
        raw_candidates(&module(src)).into_iter().map(|c| (c.kind, c.site_label())).collect()
    }

    const NESTED_GUARD: &str =
        "def g(a, b):\n    if a > 0:\n        if b > 0:\n            return a + b\n        else:\n            return a\n    else:\n        return 0\n";

    #[test]
    fn pass_has_no_candidates() {
        assert!(enumerate_candidates(&module("pass\n"), &CLConfig::default()).is_empty());
    }

    #[test]
    fn tail_if_is_one_guard_candidate() {
        assert_eq!(kinds(NESTED_GUARD), vec![(TransformKind::GuardClause, "0.0".to_string())]);
    }

    #[test]
    fn guard_candidate_reduces_score() {
        let c = enumerate_candidates(&module(NESTED_GUARD), &CLConfig::default());
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].predicted_delta, -1.0);
    }

    #[test]
    fn split_webs_candidate() {
        let src = "def f1():\n    return 1\ndef f2():\n    return 2\nt = f1()\nprint(t)\nt = f2()\nprint(t)\n";
        let splits: Vec<_> = kinds(src).into_iter().filter(|(k, _)| *k == TransformKind::SplitWebs).collect();
        assert_eq!(splits, vec![(TransformKind::SplitWebs, "<module>:t".to_string())]);
    }

    #[test]
    fn loop_tail_if_and_nested_def() {
        let src = "def f(n):\n    def h():\n        return 1\n    for i in range(n):\n        if i > 1:\n            print(h())\n    return 0\n";
        let k = kinds(src);
        assert!(k.contains(&(TransformKind::LiftNested, "0.0".to_string())), "{k:?}");
        assert!(k.contains(&(TransformKind::LoopContinue, "0.1.0.0".to_string())), "{k:?}");
    }

    #[test]
    fn inline_requires_single_straight_line_callee() {
        let src = "def add(a, b):\n    s = a + b\n    return s\ndef loop(n):\n    while n:\n        n = n - 1\n    return n\nx = add(1, 2)\ny = loop(3)\n";
        let inl: Vec<_> = kinds(src).into_iter().filter(|(k, _)| *k == TransformKind::InlineSingleCall).collect();
        assert_eq!(inl, vec![(TransformKind::InlineSingleCall, "2:add".to_string())]);
        let twice = "def one():\n    return 1\nx = one()\ny = one()\n";
        assert!(kinds(twice).iter().all(|(k, _)| *k != TransformKind::InlineSingleCall));
    }
}

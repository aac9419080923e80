use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::AnalysisError;
use crate::syntax::{ExprKind, FunctionDef, ModuleAst, Span, Stmt};

pub const BUILTINS: &[&str] = &["print", "len"];

/// Caller name for calls made by top-level statements.
pub const TOP_FRAME: &str = "<top>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSite {
    pub caller: String,
    pub callee: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallGraphInfo {
    /// Distinct caller/callee pairs. Nested functions are qualified as
    /// `outer.inner`.
    pub edges: BTreeSet<(String, String)>,
    pub sites: Vec<CallSite>,
    /// Longest call chain in frames over the non-recursive functions; the
    /// top-level frame counts as one.
    pub max_depth: usize,
    /// Functions on call cycles.
    pub recursive: BTreeSet<String>,
}

impl CallGraphInfo {
    pub fn call_count(&self, callee: &str) -> usize {
        self.sites.iter().filter(|s| s.callee == callee).count()
    }
}

/// Resolves a call made from inside `scope` (None = top level).
pub fn resolve_callee(module: &ModuleAst, scope: Option<(&FunctionDef, &str)>, name: &str) -> Option<String> {
    if let Some((f, qualified)) = scope {
        if f.nested_named(name).is_some() {
            return Some(format!("{qualified}.{name}"));
        }
    }
    module.function(name).map(|f| f.name.clone())
}

pub fn call_depth(module: &ModuleAst) -> Result<CallGraphInfo, AnalysisError> {
    let mut nodes: Vec<String> = Vec::new();
    let mut sites = Vec::new();
    for f in module.functions() {
        collect(module, f, f.name.clone(), &mut nodes, &mut sites)?;
    }
    let top: Vec<&Stmt> = module.top_level_statements().collect();
    if !top.is_empty() {
        nodes.push(TOP_FRAME.to_string());
        calls_in(module, None, TOP_FRAME, &top, &mut sites)?;
    }

    let mut graph: DiGraph<String, ()> = DiGraph::new();
    let index: BTreeMap<String, NodeIndex> = nodes.iter().map(|n| (n.clone(), graph.add_node(n.clone()))).collect();
    let edges: BTreeSet<(String, String)> = sites.iter().map(|s| (s.caller.clone(), s.callee.clone())).collect();
    for (a, b) in &edges {
        graph.add_edge(index[a], index[b], ());
    }

    let mut recursive = BTreeSet::new();
    for scc in tarjan_scc(&graph) {
        let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        if cyclic {
            recursive.extend(scc.iter().map(|&i| graph[i].clone()));
        }
    }

    // Longest path (in nodes) over the acyclic remainder, memoized per node.
    let mut memo: BTreeMap<&str, usize> = BTreeMap::new();
    fn longest<'a>(
        n: &'a str,
        edges: &'a BTreeSet<(String, String)>,
        recursive: &BTreeSet<String>,
        memo: &mut BTreeMap<&'a str, usize>,
    ) -> usize {
        if let Some(&d) = memo.get(n) {
            return d;
        }
        let best = edges
            .iter()
            .filter(|(a, b)| a == n && !recursive.contains(b))
            .map(|(_, b)| longest(b, edges, recursive, memo))
            .max()
            .unwrap_or(0);
        memo.insert(n, best + 1);
        best + 1
    }
    let mut max_depth = nodes
        .iter()
        .filter(|n| !recursive.contains(*n))
        .map(|n| longest(n, &edges, &recursive, &mut memo))
        .max()
        .unwrap_or(0);
    if module.functions().next().is_some() {
        max_depth = max_depth.max(1);
    }
    Ok(CallGraphInfo { edges, sites, max_depth, recursive })
}

fn collect(
    module: &ModuleAst,
    f: &FunctionDef,
    qualified: String,
    nodes: &mut Vec<String>,
    sites: &mut Vec<CallSite>,
) -> Result<(), AnalysisError> {
    nodes.push(qualified.clone());
    let stmts: Vec<&Stmt> = f.statements().collect();
    calls_in(module, Some((f, qualified.as_str())), &qualified, &stmts, sites)?;
    for inner in f.nested() {
        collect(module, inner, format!("{qualified}.{}", inner.name), nodes, sites)?;
    }
    Ok(())
}

fn calls_in(
    module: &ModuleAst,
    scope: Option<(&FunctionDef, &str)>,
    caller: &str,
    stmts: &[&Stmt],
    sites: &mut Vec<CallSite>,
) -> Result<(), AnalysisError> {
    let mut result = Ok(());
    for stmt in stmts {
        stmt.walk(&mut |s| {
            for e in s.exprs() {
                e.walk(&mut |e| {
                    if let ExprKind::Call(name, _) = &e.kind {
                        if result.is_err() {
                            return;
                        }
                        match resolve_callee(module, scope, name) {
                            Some(callee) => sites.push(CallSite {
                                caller: caller.to_string(),
                                callee,
                                span: e.span,
                            }),
                            None if BUILTINS.contains(&name.as_str()) => {}
                            None => {
                                result = Err(AnalysisError::UnresolvedCallee { name: name.clone(), span: e.span })
                            }
                        }
                    }
                });
            }
        });
    }
    result
}

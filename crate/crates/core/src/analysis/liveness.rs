use std::collections::BTreeSet;

use super::cfg::Cfg;
use crate::syntax::{FunctionDef, ModuleAst, Stmt};

/// Live-variable sets for every node of a scope's CFG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LivenessMap {
    pub cfg: Cfg,
    pub live_in: Vec<BTreeSet<String>>,
    pub live_out: Vec<BTreeSet<String>>,
    /// Largest live-in set over program points.
    pub peak_live: usize,
    /// Program points whose live-in set exceeds the capacity.
    pub overload_points: Vec<usize>,
}

pub fn liveness(f: &FunctionDef, capacity: usize) -> LivenessMap {
    let stmts: Vec<&Stmt> = f.statements().collect();
    solve(Cfg::build(&f.params, &stmts), capacity)
}

/// Liveness of the module's top-level statements, treated as one scope.
pub fn module_liveness(module: &ModuleAst, capacity: usize) -> LivenessMap {
    let stmts: Vec<&Stmt> = module.top_level_statements().collect();
    solve(Cfg::build(&[], &stmts), capacity)
}

/// Backward round-robin iteration until no set changes.
pub fn solve(cfg: Cfg, capacity: usize) -> LivenessMap {
    let n = cfg.nodes.len();
    let mut live_in = vec![BTreeSet::new(); n];
    let mut live_out = vec![BTreeSet::new(); n];
    let mut changed = true;
    while changed {
        changed = false;
        for i in (0..n).rev() {
            let node = &cfg.nodes[i];
            let out: BTreeSet<String> = node.succs.iter().flat_map(|&s| live_in[s].iter().cloned()).collect();
            let mut inn: BTreeSet<String> = out.difference(&node.defs).cloned().collect();
            inn.extend(node.uses.iter().cloned());
            if inn != live_in[i] || out != live_out[i] {
                live_in[i] = inn;
                live_out[i] = out;
                changed = true;
            }
        }
    }
    let peak_live = cfg.program_points().map(|i| live_in[i].len()).max().unwrap_or(0);
    let overload_points = cfg.program_points().filter(|&i| live_in[i].len() > capacity).collect();
    LivenessMap { cfg, live_in, live_out, peak_live, overload_points }
}

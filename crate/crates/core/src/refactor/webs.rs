//! Def-use webs: maximal groups of definitions of one variable linked by
//! shared uses. Distinct webs may carry distinct names.

use std::collections::{BTreeMap, BTreeSet};

use crate::analysis::Cfg;
use crate::syntax::{Expr, ExprKind, Stmt, StmtKind, Target};

/// Per-node naming of one variable after splitting its webs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WebPlan {
    pub webs: usize,
    pub def_name: BTreeMap<usize, String>,
    pub use_name: BTreeMap<usize, String>,
}

fn find(parent: &mut BTreeMap<usize, usize>, x: usize) -> usize {
    let p = parent[&x];
    if p == x {
        return x;
    }
    let root = find(parent, p);
    parent.insert(x, root);
    root
}

fn union(parent: &mut BTreeMap<usize, usize>, a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // smaller index stays root so web order follows document order
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent.insert(hi, lo);
    }
}

/// Reaching definitions of `var`: for each node, the defining nodes whose
/// value may reach its entry. The entry node stands for the parameter, or
/// for "not yet assigned" when `var` is not a parameter.
fn reaching(cfg: &Cfg, var: &str) -> Vec<BTreeSet<usize>> {
    let n = cfg.nodes.len();
    let defines = |i: usize| i == Cfg::ENTRY || cfg.nodes[i].defs.contains(var);
    let preds = cfg.predecessors();
    let mut inn = vec![BTreeSet::new(); n];
    let mut out = vec![BTreeSet::new(); n];
    out[Cfg::ENTRY].insert(Cfg::ENTRY);
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            if i == Cfg::ENTRY {
                continue;
            }
            let new_in: BTreeSet<usize> = preds[i].iter().flat_map(|&p| out[p].iter().copied()).collect();
            let new_out = if defines(i) { BTreeSet::from([i]) } else { new_in.clone() };
            if new_in != inn[i] || new_out != out[i] {
                inn[i] = new_in;
                out[i] = new_out;
                changed = true;
            }
        }
    }
    inn
}

/// Plans the renaming of `var`'s webs; `taken` holds names that new names
/// must avoid. Returns None when a fresh name cannot be found.
pub fn plan(cfg: &Cfg, var: &str, is_param: bool, taken: &BTreeSet<String>) -> Option<WebPlan> {
    let inn = reaching(cfg, var);
    let def_nodes: Vec<usize> = (0..cfg.nodes.len())
        .filter(|&i| i != Cfg::ENTRY && cfg.nodes[i].reachable && cfg.nodes[i].defs.contains(var))
        .collect();
    let mut parent: BTreeMap<usize, usize> = def_nodes.iter().map(|&d| (d, d)).collect();
    parent.insert(Cfg::ENTRY, Cfg::ENTRY);
    let use_nodes: Vec<usize> = (0..cfg.nodes.len())
        .filter(|&i| cfg.nodes[i].reachable && cfg.nodes[i].uses.contains(var) && !inn[i].is_empty())
        .collect();
    for &u in &use_nodes {
        let reach: Vec<usize> = inn[u].iter().copied().filter(|d| parent.contains_key(d)).collect();
        for w in reach.windows(2) {
            union(&mut parent, w[0], w[1]);
        }
    }

    // a web needs a real definition; the entry counts only for parameters
    let mut roots: Vec<usize> = Vec::new();
    let mut real: Vec<usize> = def_nodes.clone();
    if is_param {
        real.insert(0, Cfg::ENTRY);
    }
    for d in real {
        let r = find(&mut parent, d);
        if !roots.contains(&r) {
            roots.push(r);
        }
    }
    roots.sort_unstable();

    let mut names: BTreeMap<usize, String> = BTreeMap::new();
    let mut used = taken.clone();
    for (k, &root) in roots.iter().enumerate() {
        if k == 0 {
            names.insert(root, var.to_string());
            continue;
        }
        let fresh = (k + 1..k + 1001).map(|s| format!("{var}_{s}")).find(|n| !used.contains(n))?;
        used.insert(fresh.clone());
        names.insert(root, fresh);
    }

    let mut plan = WebPlan { webs: roots.len(), ..WebPlan::default() };
    for &d in &def_nodes {
        let r = find(&mut parent, d);
        plan.def_name.insert(d, names.get(&r).cloned().unwrap_or_else(|| var.to_string()));
    }
    for &u in &use_nodes {
        let r = find(&mut parent, *inn[u].iter().next().expect("non-empty"));
        plan.use_name.insert(u, names.get(&r).cloned().unwrap_or_else(|| var.to_string()));
    }
    Some(plan)
}

/// Names that occur anywhere in `stmts`, as variables or loop targets.
pub fn names_in(params: &[String], stmts: &[&Stmt]) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = params.iter().cloned().collect();
    for s in stmts {
        s.walk(&mut |s| {
            match &s.kind {
                StmtKind::Assign { target, .. } => {
                    out.insert(target.base().to_string());
                }
                StmtKind::For { var, .. } => {
                    out.insert(var.clone());
                }
                _ => {}
            }
            for e in s.exprs() {
                e.walk(&mut |e| {
                    if let ExprKind::Name(n) = &e.kind {
                        out.insert(n.clone());
                    }
                });
            }
        });
    }
    out
}

/// Applies `plan` to the statements `Cfg::build` was given, visiting nodes
/// in the order the graph builder created them.
pub fn rename(stmts: Vec<&mut Stmt>, var: &str, plan: &WebPlan) {
    let mut next = 2; // entry and exit come first
    for s in stmts {
        rename_stmt(s, var, plan, &mut next);
    }
}

fn rename_uses(e: &mut Expr, var: &str, name: Option<&String>) {
    let Some(name) = name else { return };
    e.walk_mut(&mut |e| {
        if let ExprKind::Name(n) = &mut e.kind {
            if n == var {
                *n = name.clone();
            }
        }
    });
}

fn rename_stmt(s: &mut Stmt, var: &str, plan: &WebPlan, next: &mut usize) {
    match &mut s.kind {
        StmtKind::If { arms, else_block } => {
            for (cond, body) in arms {
                rename_uses(cond, var, plan.use_name.get(next));
                *next += 1;
                body.iter_mut().for_each(|s| rename_stmt(s, var, plan, next));
            }
            if let Some(b) = else_block {
                b.iter_mut().for_each(|s| rename_stmt(s, var, plan, next));
            }
        }
        StmtKind::While { cond, body } => {
            rename_uses(cond, var, plan.use_name.get(next));
            *next += 1;
            body.iter_mut().for_each(|s| rename_stmt(s, var, plan, next));
        }
        StmtKind::For { var: v, args, body } => {
            for a in args.iter_mut() {
                rename_uses(a, var, plan.use_name.get(next));
            }
            let bind = *next + 2;
            *next += 3;
            if v == var {
                if let Some(n) = plan.def_name.get(&bind) {
                    *v = n.clone();
                }
            }
            body.iter_mut().for_each(|s| rename_stmt(s, var, plan, next));
        }
        StmtKind::Assign { target, value } => {
            let uses = plan.use_name.get(next);
            rename_uses(value, var, uses);
            match target {
                Target::Name(n) => {
                    if n == var {
                        if let Some(d) = plan.def_name.get(next) {
                            *n = d.clone();
                        }
                    }
                }
                Target::Index(n, idx) => {
                    rename_uses(idx, var, uses);
                    if n == var {
                        if let Some(u) = uses {
                            *n = u.clone();
                        }
                    }
                }
            }
            *next += 1;
        }
        _ => {
            let uses = plan.use_name.get(next).cloned();
            for e in s.exprs_mut() {
                rename_uses(e, var, uses.as_ref());
            }
            *next += 1;
        }
    }
}

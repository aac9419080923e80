use std::collections::BTreeSet;

use super::path::{function_mut, parent_mut, resolve, ListMut, NodePath, NodeRef};
use super::{
    clashes_at_top, fingerprint, guard_branches, is_inline_site, webs, RefactorError, TransformKind,
    TransformationCandidate,
};
use crate::analysis::{call_depth, Cfg};
use crate::syntax::{
    block_ends_in_return, Expr, ExprKind, FunctionDef, Item, ModuleAst, Stmt, StmtKind, Target, UnOp,
};

const MAX_SUFFIX: usize = 1000;

/// Applies `cand` to a copy of `m`.
pub fn apply_transformation(m: &ModuleAst, cand: &TransformationCandidate) -> Result<ModuleAst, RefactorError> {
    let stale = || RefactorError::StaleCandidate { kind: cand.kind, site: cand.site_label() };
    if fingerprint(m, &cand.site).unwrap_or_default() != cand.fingerprint {
        return Err(stale());
    }
    let mut out = m.clone();
    let done = match cand.kind {
        TransformKind::GuardClause => guard_clause(&mut out, &cand.site),
        TransformKind::LoopContinue => loop_continue(&mut out, &cand.site),
        TransformKind::LiftNested => lift_nested(&mut out, &cand.site)?,
        TransformKind::InlineSingleCall => {
            let callee = cand.target.as_deref().ok_or_else(stale)?;
            inline_single_call(&mut out, m, &cand.site, callee)
        }
        TransformKind::SplitWebs => {
            let var = cand.target.as_deref().ok_or_else(stale)?;
            split_webs(&mut out, &cand.site, var)?
        }
    };
    if done {
        Ok(out)
    } else {
        Err(stale())
    }
}

fn negate(cond: Expr) -> Expr {
    match cond.kind {
        ExprKind::Unary(UnOp::Not, inner) => *inner,
        kind => {
            let span = cond.span;
            Expr::new(ExprKind::Unary(UnOp::Not, Box::new(Expr::new(kind, span))), span)
        }
    }
}

fn single_arm(cond: Expr, body: Vec<Stmt>, span: crate::syntax::Span) -> Stmt {
    Stmt::new(StmtKind::If { arms: vec![(cond, body)], else_block: None }, span)
}

fn guard_clause(m: &mut ModuleAst, site: &NodePath) -> bool {
    let Some((ListMut::Items(items), idx)) = parent_mut(m, site) else { return false };
    let Some(Item::Stmt(stmt)) = items.get(idx) else { return false };
    let Some((then, rest)) = guard_branches(stmt) else { return false };
    let StmtKind::If { arms, .. } = &stmt.kind else { return false };
    let cond = arms[0].0.clone();
    let then = then.to_vec();
    let span = stmt.span;

    // keep the branch order when the then-branch already exits, unless only
    // the else-branch ends in a plain return and the then-branch is deeper
    let then_literal = matches!(then.last().map(|s| &s.kind), Some(StmtKind::Return(_)));
    let keep = block_ends_in_return(&then) && (then_literal || !block_ends_in_return(&rest));
    let (guard, tail) = if keep {
        (single_arm(cond, then, span), rest)
    } else {
        (single_arm(negate(cond), rest, span), then)
    };
    let replacement = std::iter::once(guard).chain(tail).map(Item::Stmt);
    items.splice(idx..idx + 1, replacement);
    true
}

fn loop_continue(m: &mut ModuleAst, site: &NodePath) -> bool {
    let Some((ListMut::Stmts(stmts), idx)) = parent_mut(m, site) else { return false };
    let Some(stmt) = stmts.get(idx) else { return false };
    let StmtKind::If { arms, else_block: None } = &stmt.kind else { return false };
    if arms.len() != 1 {
        return false;
    }
    let (cond, body) = arms[0].clone();
    let span = stmt.span;
    let guard = single_arm(negate(cond), vec![Stmt::new(StmtKind::Continue, span)], span);
    stmts.splice(idx..idx + 1, std::iter::once(guard).chain(body));
    true
}

fn all_function_names(items: &[Item], out: &mut BTreeSet<String>) {
    for f in items.iter().filter_map(Item::as_function) {
        out.insert(f.name.clone());
        all_function_names(&f.body, out);
    }
}

fn rename_calls(stmts: &mut [Stmt], from: &str, to: &str) {
    for s in stmts {
        s.walk_mut(&mut |s| {
            for e in s.exprs_mut() {
                e.walk_mut(&mut |e| {
                    if let ExprKind::Call(n, _) = &mut e.kind {
                        if n == from {
                            *n = to.to_string();
                        }
                    }
                });
            }
        });
    }
}

fn lift_nested(m: &mut ModuleAst, site: &NodePath) -> Result<bool, RefactorError> {
    if site.0.len() < 2 {
        return Ok(false);
    }
    let Some(NodeRef::Function(f)) = resolve(m, site) else { return Ok(false) };
    let old = f.name.clone();
    let new_name = if clashes_at_top(m, &old) {
        let mut taken = BTreeSet::new();
        all_function_names(&m.items, &mut taken);
        (1..=MAX_SUFFIX)
            .map(|k| format!("{old}_L{k}"))
            .find(|n| !taken.contains(n) && !clashes_at_top(m, n))
            .ok_or(RefactorError::NameCollisionExhausted { base: old.clone() })?
    } else {
        old.clone()
    };

    let parent_path = NodePath(site.0[..site.0.len() - 1].to_vec());
    let Some(parent) = function_mut(m, &parent_path) else { return Ok(false) };
    let idx = *site.0.last().expect("non-empty");
    let Item::Function(mut lifted) = parent.body.remove(idx) else { return Ok(false) };
    if new_name != old {
        for item in parent.body.iter_mut() {
            if let Item::Stmt(s) = item {
                rename_calls(std::slice::from_mut(s), &old, &new_name);
            }
        }
        lifted.name = new_name;
    }
    m.items.insert(site.0[0], Item::Function(lifted));
    Ok(true)
}

fn names_anywhere(m: &ModuleAst) -> BTreeSet<String> {
    fn scan(items: &[Item], out: &mut BTreeSet<String>) {
        for item in items {
            match item {
                Item::Function(f) => {
                    out.extend(f.params.iter().cloned());
                    scan(&f.body, out);
                }
                Item::Stmt(s) => {
                    let stmts = [s];
                    out.extend(webs::names_in(&[], &stmts));
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    scan(&m.items, &mut out);
    out
}

fn rename_vars(s: &mut Stmt, ren: &impl Fn(&str) -> String) {
    s.walk_mut(&mut |s| {
        match &mut s.kind {
            StmtKind::Assign { target: Target::Name(n) | Target::Index(n, _), .. } => *n = ren(n),
            StmtKind::For { var, .. } => *var = ren(var),
            _ => {}
        }
        for e in s.exprs_mut() {
            e.walk_mut(&mut |e| {
                if let ExprKind::Name(n) = &mut e.kind {
                    *n = ren(n);
                }
            });
        }
    });
}

fn is_literal(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Int(_) | ExprKind::Str(_) | ExprKind::Bool(_) | ExprKind::None)
}

fn inline_single_call(m: &mut ModuleAst, orig: &ModuleAst, site: &NodePath, callee: &str) -> bool {
    let Some(calls) = call_depth(orig).ok() else { return false };
    let Some(NodeRef::Stmt(call_stmt)) = resolve(orig, site) else { return false };
    if is_inline_site(orig, &calls, site, call_stmt).as_deref() != Some(callee) {
        return false;
    }
    let f: &FunctionDef = orig.function(callee).expect("eligible callee exists");
    let taken = names_anywhere(orig);
    let Some(n) = (1..).find(|n| {
        let prefix = format!("__inl_{n}_");
        !taken.iter().any(|t| t.starts_with(&prefix))
    }) else {
        return false;
    };
    let ren = |name: &str| format!("__inl_{n}_{name}");
    let span = call_stmt.span;
    let (target, args) = match &call_stmt.kind {
        StmtKind::Assign { target, value: Expr { kind: ExprKind::Call(_, args), .. } } => (Some(target.clone()), args),
        StmtKind::Expr(Expr { kind: ExprKind::Call(_, args), .. }) => (None, args),
        _ => return false,
    };

    let mut replacement: Vec<Stmt> = f
        .params
        .iter()
        .zip(args)
        .map(|(p, a)| Stmt::new(StmtKind::Assign { target: Target::Name(ren(p)), value: a.clone() }, span))
        .collect();
    let body: Vec<&Stmt> = f.statements().collect();
    let (ret, init) = body.split_last().expect("eligible callee has a return");
    for s in init {
        let mut s = (*s).clone();
        rename_vars(&mut s, &ren);
        replacement.push(s);
    }
    let StmtKind::Return(value) = &ret.kind else { return false };
    let mut value = value.clone();
    if let Some(v) = value.as_mut() {
        v.walk_mut(&mut |e| {
            if let ExprKind::Name(name) = &mut e.kind {
                *name = ren(name);
            }
        });
    }
    match (target, value) {
        (Some(target), value) => {
            let value = value.unwrap_or_else(|| Expr::new(ExprKind::None, span));
            replacement.push(Stmt::new(StmtKind::Assign { target, value }, span));
        }
        (None, Some(v)) if !is_literal(&v) => replacement.push(Stmt::new(StmtKind::Expr(v), span)),
        (None, _) => {}
    }
    if replacement.is_empty() {
        replacement.push(Stmt::new(StmtKind::Pass, span));
    }

    let Some((list, idx)) = parent_mut(m, site) else { return false };
    match list {
        ListMut::Items(items) => {
            items.splice(idx..idx + 1, replacement.into_iter().map(Item::Stmt));
        }
        ListMut::Stmts(stmts) => {
            stmts.splice(idx..idx + 1, replacement);
        }
    }
    m.items.retain(|i| i.as_function().is_none_or(|g| g.name != callee));
    true
}

fn split_webs(m: &mut ModuleAst, site: &NodePath, var: &str) -> Result<bool, RefactorError> {
    let (params, stmts): (Vec<String>, Vec<Stmt>) = if site.0.is_empty() {
        (Vec::new(), m.top_level_statements().cloned().collect())
    } else {
        match resolve(m, site) {
            Some(NodeRef::Function(f)) => (f.params.clone(), f.statements().cloned().collect()),
            _ => return Ok(false),
        }
    };
    let refs: Vec<&Stmt> = stmts.iter().collect();
    let cfg = Cfg::build(&params, &refs);
    if !cfg.locals.contains(var) {
        return Ok(false);
    }
    let taken = webs::names_in(&params, &refs);
    let plan = webs::plan(&cfg, var, params.iter().any(|p| p == var), &taken)
        .ok_or_else(|| RefactorError::NameCollisionExhausted { base: var.to_string() })?;
    if plan.webs < 2 {
        return Ok(false);
    }
    let items: &mut Vec<Item> = if site.0.is_empty() {
        &mut m.items
    } else {
        match function_mut(m, site) {
            Some(f) => &mut f.body,
            None => return Ok(false),
        }
    };
    let targets: Vec<&mut Stmt> = items
        .iter_mut()
        .filter_map(|i| match i {
            Item::Stmt(s) => Some(s),
            Item::Function(_) => None,
        })
        .collect();
    webs::rename(targets, var, &plan);
    Ok(true)
}

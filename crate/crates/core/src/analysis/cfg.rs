use std::collections::{BTreeSet, VecDeque};

use crate::syntax::{scope_locals, Expr, ExprKind, Span, Stmt, StmtKind, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Entry,
    Exit,
    /// A simple statement, or the whole of `return`/`break`/`continue`.
    Simple,
    /// Test of an `if`/`elif` arm or a `while` loop.
    Cond,
    /// Evaluation of `range(...)` arguments, once per `for`.
    RangeInit,
    /// The per-iteration continue-or-exit decision of a `for`.
    ForHead,
    /// Assignment of the next value to the loop variable.
    ForBind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfgNode {
    pub kind: NodeKind,
    /// Span of the statement (or condition) the node was built from.
    pub span: Span,
    pub defs: BTreeSet<String>,
    pub uses: BTreeSet<String>,
    pub succs: Vec<usize>,
    /// False for code after `return`/`break`/`continue` that no path reaches.
    pub reachable: bool,
}

impl CfgNode {
    pub fn is_marker(&self) -> bool {
        matches!(self.kind, NodeKind::Entry | NodeKind::Exit)
    }
}

/// Statement-granularity control-flow graph of one scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    pub nodes: Vec<CfgNode>,
    /// Variables of the scope: parameters, assignment targets, loop variables.
    pub locals: BTreeSet<String>,
}

impl Cfg {
    pub const ENTRY: usize = 0;
    pub const EXIT: usize = 1;

    /// Builds the graph for a scope with `params` and top-level `stmts`.
    /// Parameters are defined by the entry node.
    pub fn build(params: &[String], stmts: &[&Stmt]) -> Cfg {
        let locals = scope_locals(params, stmts);
        let mut b = Builder { nodes: Vec::new(), locals: &locals, loops: Vec::new() };
        let entry = b.node(NodeKind::Entry, Span::default(), params.iter().cloned().collect(), BTreeSet::new());
        b.node(NodeKind::Exit, Span::default(), BTreeSet::new(), BTreeSet::new());
        let mut preds = vec![entry];
        for stmt in stmts {
            preds = b.stmt(stmt, preds);
        }
        for p in preds {
            b.link(p, Cfg::EXIT);
        }
        let mut cfg = Cfg { nodes: b.nodes, locals };
        cfg.mark_reachable();
        cfg
    }

    fn mark_reachable(&mut self) {
        let mut queue = VecDeque::from([Cfg::ENTRY]);
        self.nodes[Cfg::ENTRY].reachable = true;
        while let Some(n) = queue.pop_front() {
            for s in self.nodes[n].succs.clone() {
                if !self.nodes[s].reachable {
                    self.nodes[s].reachable = true;
                    queue.push_back(s);
                }
            }
        }
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for &s in &n.succs {
                preds[s].push(i);
            }
        }
        preds
    }

    /// Indices of nodes that stand for program points (markers excluded).
    pub fn program_points(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| !n.is_marker()).map(|(i, _)| i)
    }
}

struct LoopTargets {
    head: usize,
    breaks: Vec<usize>,
}

struct Builder<'a> {
    nodes: Vec<CfgNode>,
    locals: &'a BTreeSet<String>,
    loops: Vec<LoopTargets>,
}

impl Builder<'_> {
    fn node(&mut self, kind: NodeKind, span: Span, defs: BTreeSet<String>, uses: BTreeSet<String>) -> usize {
        self.nodes.push(CfgNode { kind, span, defs, uses, succs: Vec::new(), reachable: false });
        self.nodes.len() - 1
    }

    fn link(&mut self, from: usize, to: usize) {
        if !self.nodes[from].succs.contains(&to) {
            self.nodes[from].succs.push(to);
        }
    }

    fn link_all(&mut self, preds: &[usize], to: usize) {
        for &p in preds {
            self.link(p, to);
        }
    }

    fn uses_of<'e>(&self, exprs: impl IntoIterator<Item = &'e Expr>) -> BTreeSet<String> {
        let mut uses = BTreeSet::new();
        for e in exprs {
            e.walk(&mut |e| {
                if let ExprKind::Name(n) = &e.kind {
                    if self.locals.contains(n) {
                        uses.insert(n.clone());
                    }
                }
            });
        }
        uses
    }

    fn block(&mut self, stmts: &[Stmt], mut preds: Vec<usize>) -> Vec<usize> {
        for s in stmts {
            preds = self.stmt(s, preds);
        }
        preds
    }

    /// Adds `stmt` after `preds`; returns the nodes that fall through.
    fn stmt(&mut self, stmt: &Stmt, preds: Vec<usize>) -> Vec<usize> {
        match &stmt.kind {
            StmtKind::If { arms, else_block } => {
                let mut pending = preds;
                let mut falls = Vec::new();
                for (cond, body) in arms {
                    let c = self.node(NodeKind::Cond, cond.span, BTreeSet::new(), self.uses_of([cond]));
                    self.link_all(&pending, c);
                    falls.extend(self.block(body, vec![c]));
                    pending = vec![c];
                }
                match else_block {
                    Some(b) => falls.extend(self.block(b, pending)),
                    None => falls.extend(pending),
                }
                falls
            }
            StmtKind::While { cond, body } => {
                let head = self.node(NodeKind::Cond, stmt.span, BTreeSet::new(), self.uses_of([cond]));
                self.link_all(&preds, head);
                self.loops.push(LoopTargets { head, breaks: Vec::new() });
                let falls = self.block(body, vec![head]);
                self.link_all(&falls, head);
                let targets = self.loops.pop().expect("loop stack balanced");
                let mut out = vec![head];
                out.extend(targets.breaks);
                out
            }
            StmtKind::For { var, args, body } => {
                let init = self.node(NodeKind::RangeInit, stmt.span, BTreeSet::new(), self.uses_of(args));
                self.link_all(&preds, init);
                let head = self.node(NodeKind::ForHead, stmt.span, BTreeSet::new(), BTreeSet::new());
                self.link(init, head);
                let bind = self.node(NodeKind::ForBind, stmt.span, BTreeSet::from([var.clone()]), BTreeSet::new());
                self.link(head, bind);
                self.loops.push(LoopTargets { head, breaks: Vec::new() });
                let falls = self.block(body, vec![bind]);
                self.link_all(&falls, head);
                let targets = self.loops.pop().expect("loop stack balanced");
                let mut out = vec![head];
                out.extend(targets.breaks);
                out
            }
            _ => {
                let (defs, uses) = match &stmt.kind {
                    StmtKind::Assign { target: Target::Name(n), value } => {
                        (BTreeSet::from([n.clone()]), self.uses_of([value]))
                    }
                    StmtKind::Assign { target: Target::Index(n, idx), value } => {
                        let mut uses = self.uses_of([idx, value]);
                        if self.locals.contains(n) {
                            uses.insert(n.clone());
                        }
                        (BTreeSet::new(), uses)
                    }
                    _ => (BTreeSet::new(), self.uses_of(stmt.exprs())),
                };
                let n = self.node(NodeKind::Simple, stmt.span, defs, uses);
                self.link_all(&preds, n);
                match stmt.kind {
                    StmtKind::Return(_) => {
                        self.link(n, Cfg::EXIT);
                        Vec::new()
                    }
                    StmtKind::Break => {
                        if let Some(l) = self.loops.last_mut() {
                            l.breaks.push(n);
                        }
                        Vec::new()
                    }
                    StmtKind::Continue => {
                        if let Some(head) = self.loops.last().map(|l| l.head) {
                            self.link(n, head);
                        }
                        Vec::new()
                    }
                    _ => vec![n],
                }
            }
        }
    }
}

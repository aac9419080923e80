use std::fmt;

use crate::syntax::{FunctionDef, Item, ModuleAst, Stmt};

/// Address of a node: an index into the module items, then for a function
/// an index into its body, for a statement a block index followed by an
/// index into that block, and so on.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodePath(pub Vec<usize>);

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("<module>");
        }
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

impl NodePath {
    pub fn child(&self, idx: &[usize]) -> NodePath {
        let mut v = self.0.clone();
        v.extend_from_slice(idx);
        NodePath(v)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum NodeRef<'a> {
    Function(&'a FunctionDef),
    Stmt(&'a Stmt),
}

enum List<'a> {
    Items(&'a [Item]),
    Stmts(&'a [Stmt]),
}

pub enum ListMut<'a> {
    Items(&'a mut Vec<Item>),
    Stmts(&'a mut Vec<Stmt>),
}

pub fn resolve<'a>(m: &'a ModuleAst, path: &NodePath) -> Option<NodeRef<'a>> {
    let p = &path.0;
    let mut list = List::Items(&m.items);
    let mut i = 0;
    loop {
        let idx = *p.get(i)?;
        let node = match list {
            List::Items(xs) => match xs.get(idx)? {
                Item::Function(f) => NodeRef::Function(f),
                Item::Stmt(s) => NodeRef::Stmt(s),
            },
            List::Stmts(xs) => NodeRef::Stmt(xs.get(idx)?),
        };
        i += 1;
        if i == p.len() {
            return Some(node);
        }
        list = match node {
            NodeRef::Function(f) => List::Items(&f.body),
            NodeRef::Stmt(s) => {
                let b = *p.get(i)?;
                i += 1;
                List::Stmts(s.blocks().get(b)?.as_slice())
            }
        };
    }
}

/// The list holding the node at `path` and the node's index in it.
pub fn parent_mut<'a>(m: &'a mut ModuleAst, path: &NodePath) -> Option<(ListMut<'a>, usize)> {
    let p = &path.0;
    let mut list = ListMut::Items(&mut m.items);
    let mut i = 0;
    loop {
        let idx = *p.get(i)?;
        if i + 1 == p.len() {
            return Some((list, idx));
        }
        let stmt = match list {
            ListMut::Items(xs) => match xs.get_mut(idx)? {
                Item::Function(f) => {
                    list = ListMut::Items(&mut f.body);
                    i += 1;
                    continue;
                }
                Item::Stmt(s) => s,
            },
            ListMut::Stmts(xs) => xs.get_mut(idx)?,
        };
        let b = *p.get(i + 1)?;
        list = ListMut::Stmts(stmt.blocks_mut().into_iter().nth(b)?);
        i += 2;
        if i >= p.len() {
            return None;
        }
    }
}

pub fn function_mut<'a>(m: &'a mut ModuleAst, path: &NodePath) -> Option<&'a mut FunctionDef> {
    match parent_mut(m, path)? {
        (ListMut::Items(xs), idx) => match xs.get_mut(idx)? {
            Item::Function(f) => Some(f),
            Item::Stmt(_) => None,
        },
        (ListMut::Stmts(_), _) => None,
    }
}

/// Path of the innermost function containing `path`, if any.
pub fn enclosing_function(m: &ModuleAst, path: &NodePath) -> Option<NodePath> {
    (1..path.0.len())
        .rev()
        .map(|k| NodePath(path.0[..k].to_vec()))
        .find(|p| matches!(resolve(m, p), Some(NodeRef::Function(_))))
}

/// Every node with its path, parents before children, in source order.
pub fn preorder(m: &ModuleAst) -> Vec<(NodePath, NodeRef<'_>)> {
    let mut out = Vec::new();
    walk_items(&m.items, &NodePath::default(), &mut out);
    out
}

fn walk_items<'a>(items: &'a [Item], prefix: &NodePath, out: &mut Vec<(NodePath, NodeRef<'a>)>) {
    for (i, item) in items.iter().enumerate() {
        let path = prefix.child(&[i]);
        match item {
            Item::Function(f) => {
                out.push((path.clone(), NodeRef::Function(f)));
                walk_items(&f.body, &path, out);
            }
            Item::Stmt(s) => {
                out.push((path.clone(), NodeRef::Stmt(s)));
                walk_stmt(s, &path, out);
            }
        }
    }
}

fn walk_stmt<'a>(s: &'a Stmt, path: &NodePath, out: &mut Vec<(NodePath, NodeRef<'a>)>) {
    for (b, block) in s.blocks().into_iter().enumerate() {
        for (j, st) in block.iter().enumerate() {
            let p = path.child(&[b, j]);
            out.push((p.clone(), NodeRef::Stmt(st)));
            walk_stmt(st, &p, out);
        }
    }
}

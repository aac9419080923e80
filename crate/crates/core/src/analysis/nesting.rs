use crate::syntax::{FunctionDef, Item, ModuleAst, Stmt};

/// Name used for the pseudo-function formed by top-level statements.
pub const MODULE_SCOPE: &str = "<module>";

#[derive(Debug, Clone, PartialEq)]
pub struct NestingProfile {
    pub name: String,
    pub max_nesting: usize,
    pub mean_nesting: f64,
}

/// Per top-level function (and the module scope, when it has statements):
/// depth of each statement counted in enclosing blocks. Statements of nested
/// functions count toward their top-level ancestor, one level below the
/// definition site.
pub fn nesting_profile(module: &ModuleAst) -> Vec<NestingProfile> {
    let mut rows = Vec::new();
    let top: Vec<&Stmt> = module.top_level_statements().collect();
    for item in &module.items {
        if let Item::Function(f) = item {
            let mut depths = Vec::new();
            function_depths(f, 0, &mut depths);
            rows.push(profile(&f.name, &depths));
        }
    }
    if !top.is_empty() {
        let mut depths = Vec::new();
        for s in top {
            stmt_depths(s, 0, &mut depths);
        }
        rows.push(profile(MODULE_SCOPE, &depths));
    }
    rows
}

fn profile(name: &str, depths: &[usize]) -> NestingProfile {
    let max_nesting = depths.iter().copied().max().unwrap_or(0);
    let mean_nesting = if depths.is_empty() {
        0.0
    } else {
        depths.iter().sum::<usize>() as f64 / depths.len() as f64
    };
    NestingProfile { name: name.to_string(), max_nesting, mean_nesting }
}

fn function_depths(f: &FunctionDef, base: usize, out: &mut Vec<usize>) {
    for item in &f.body {
        match item {
            Item::Stmt(s) => stmt_depths(s, base, out),
            Item::Function(inner) => function_depths(inner, base + 1, out),
        }
    }
}

fn stmt_depths(s: &Stmt, depth: usize, out: &mut Vec<usize>) {
    out.push(depth);
    for block in s.blocks() {
        for inner in block {
            stmt_depths(inner, depth + 1, out);
        }
    }
}

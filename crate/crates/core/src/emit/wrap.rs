use std::collections::BTreeSet;

use crate::syntax::{join_pieces, print_expr, BreakClass, Header, LogicalLine, Piece};

/// Largest opportunity set searched exhaustively; beyond it breaks are
/// chosen greedily.
const EXHAUSTIVE_LIMIT: usize = 14;

/// Physical lines for one logical line and whether they still exceed the
/// limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrappedLine {
    pub lines: Vec<String>,
    pub unbreakable: bool,
}

fn width(s: &str) -> usize {
    s.chars().count()
}

/// Wraps a logical line to `limit` code points: the widest slot expression
/// is parenthesized when its operators are not already inside brackets,
/// then breaks are taken class by class (shallowest bracket depth first,
/// commas before operators, loosest operators first). A line that cannot be
/// brought within the limit comes back unchanged and flagged.
pub fn wrap_logical(line: &LogicalLine, limit: usize) -> WrappedLine {
    let text = line.text();
    if width(&text) <= limit || line.header == Header::Blank {
        return WrappedLine { lines: vec![text], unbreakable: false };
    }
    let slots = line.header.slots();
    let widest = slots
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| width(&print_expr(a)).cmp(&width(&print_expr(b))).then(j.cmp(i)))
        .map(|(i, _)| i);
    let pieces = line.pieces(widest);
    let breaks = choose_breaks(&pieces, line.indent(), limit);
    let lines = assemble(&pieces, line.indent(), &breaks);
    if lines.iter().all(|l| width(l) <= limit) {
        WrappedLine { lines, unbreakable: false }
    } else {
        WrappedLine { lines: vec![text], unbreakable: true }
    }
}

/// Renders `pieces` with line breaks before the pieces at `breaks`.
pub fn assemble(pieces: &[Piece], indent: usize, breaks: &BTreeSet<usize>) -> Vec<String> {
    let mut lines = Vec::new();
    let mut current = " ".repeat(indent);
    let mut line_start = true;
    for (i, p) in pieces.iter().enumerate() {
        if breaks.contains(&i) {
            lines.push(std::mem::take(&mut current));
            current = " ".repeat(indent + 4);
            line_start = true;
        }
        if p.space_before && !line_start {
            current.push(' ');
        }
        current.push_str(&p.text);
        line_start = false;
    }
    lines.push(current);
    lines
}

/// Ordering key of a layout; smaller is better.
fn layout_cost(lines: &[String], limit: usize) -> (usize, usize, usize) {
    let overlong = lines.iter().filter(|l| width(l) > limit).count();
    let longest = lines.iter().map(|l| width(l)).max().unwrap_or(0);
    (overlong, lines.len(), longest)
}

fn choose_breaks(pieces: &[Piece], indent: usize, limit: usize) -> BTreeSet<usize> {
    let classes: BTreeSet<BreakClass> = pieces.iter().filter_map(|p| p.brk).collect();
    let mut chosen = BTreeSet::new();
    for class in classes {
        let lines = assemble(pieces, indent, &chosen);
        if lines.iter().all(|l| width(l) <= limit) {
            break;
        }
        let options: Vec<usize> = (0..pieces.len())
            .filter(|&i| pieces[i].brk == Some(class) && line_is_overlong(pieces, indent, &chosen, i, limit))
            .collect();
        if options.is_empty() {
            continue;
        }
        let picked = if options.len() <= EXHAUSTIVE_LIMIT {
            best_subset(pieces, indent, limit, &chosen, &options)
        } else {
            greedy_fill(pieces, indent, limit, &chosen, &options)
        };
        chosen.extend(picked);
    }
    chosen
}

/// Whether the physical line containing piece `i` is too long under `chosen`.
fn line_is_overlong(pieces: &[Piece], indent: usize, chosen: &BTreeSet<usize>, i: usize, limit: usize) -> bool {
    let start = chosen.range(..=i).next_back().copied().unwrap_or(0);
    let end = chosen.range(i + 1..).next().copied().unwrap_or(pieces.len());
    let lead = if start == 0 { indent } else { indent + 4 };
    let text = join_pieces(&pieces[start..end]);
    let text = if start > 0 { text.trim_start().to_string() } else { text };
    lead + width(&text) > limit
}

fn best_subset(
    pieces: &[Piece],
    indent: usize,
    limit: usize,
    chosen: &BTreeSet<usize>,
    options: &[usize],
) -> Vec<usize> {
    let mut best: Option<((usize, usize, usize), Vec<usize>)> = None;
    for mask in 1u32..(1 << options.len()) {
        let subset: Vec<usize> = options.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &i)| i).collect();
        let mut all = chosen.clone();
        all.extend(subset.iter().copied());
        let cost = layout_cost(&assemble(pieces, indent, &all), limit);
        let better = match &best {
            None => true,
            Some((best_cost, best_subset)) => {
                cost < *best_cost || (cost == *best_cost && later(&subset, best_subset))
            }
        };
        if better {
            best = Some((cost, subset));
        }
    }
    best.map(|(_, s)| s).unwrap_or_default()
}

/// True when `a` places its breaks further right than `b`.
fn later(a: &[usize], b: &[usize]) -> bool {
    a.iter().rev().cmp(b.iter().rev()).is_gt()
}

fn greedy_fill(
    pieces: &[Piece],
    indent: usize,
    limit: usize,
    chosen: &BTreeSet<usize>,
    options: &[usize],
) -> Vec<usize> {
    let mut picked = Vec::new();
    let mut current = chosen.clone();
    for (k, &opt) in options.iter().enumerate() {
        // break before `opt` only if the next opportunity would overflow
        let next = options.get(k + 1).copied().unwrap_or(pieces.len());
        let mut probe = current.clone();
        if next < pieces.len() {
            probe.insert(next);
        }
        if line_is_overlong(pieces, indent, &probe, opt, limit) {
            current.insert(opt);
            picked.push(opt);
        }
    }
    picked
}

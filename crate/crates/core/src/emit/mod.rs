//! The virtual view: canonical text wrapped to the line budget, comments
//! re-attached, a line-level provenance map and before/after reports.

mod wrap;

pub use wrap::{assemble, wrap_logical, WrappedLine};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{cl_report, AnalysisError, CLConfig, CognitiveLoadReport};
use crate::syntax::{layout, parse_source, tokenize, Comment, Header, ModuleAst, SourceUnit, SyntaxError};

#[derive(Debug, Error)]
pub enum EmitError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProvenanceEntry {
    pub view_line: usize,
    pub orig_line: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Unbreakable {
    pub view_line: usize,
    pub length: usize,
}

/// Rendered view lines with their origins, before any reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub lines: Vec<String>,
    pub provenance: Vec<ProvenanceEntry>,
    pub unbreakable: Vec<Unbreakable>,
}

impl Rendered {
    pub fn text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out
    }

    fn push(&mut self, text: String, orig: Option<u32>, flagged: bool, limit: usize) {
        let view_line = self.lines.len() + 1;
        let length = text.chars().count();
        if flagged || length > limit {
            self.unbreakable.push(Unbreakable { view_line, length });
        }
        self.provenance.push(ProvenanceEntry { view_line, orig_line: orig });
        self.lines.push(text);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VirtualView {
    pub text: String,
    pub provenance: Vec<ProvenanceEntry>,
    pub report_before: CognitiveLoadReport,
    pub report_after: CognitiveLoadReport,
    pub unbreakable: Vec<Unbreakable>,
}

/// Splits a comment into `#` lines of at most `width` code points. Words
/// are never split.
fn wrap_comment(text: &str, width: usize) -> Vec<String> {
    let body = text.trim_start_matches('#').trim();
    if text.chars().count() <= width || body.is_empty() {
        return vec![text.to_string()];
    }
    let mut out = Vec::new();
    let mut current = String::from("#");
    for word in body.split_whitespace() {
        if current != "#" && current.chars().count() + 1 + word.chars().count() > width {
            out.push(std::mem::replace(&mut current, String::from("#")));
        }
        current.push(' ');
        current.push_str(word);
    }
    out.push(current);
    out
}

/// Renders `module` wrapped to `limit`, placing each comment before the
/// first statement at or after the comment's original line.
pub fn render(module: &ModuleAst, comments: &[Comment], limit: usize) -> Rendered {
    let lines = layout(module);
    let mut placed = vec![false; comments.len()];
    let starts: Vec<u32> = lines.iter().filter(|l| !l.origin.is_synthetic()).map(|l| l.origin.line).collect();
    // each comment attaches to the smallest statement line at or after it
    let anchors: Vec<Option<u32>> =
        comments.iter().map(|c| starts.iter().copied().filter(|&s| s >= c.line).min()).collect();

    let mut out = Rendered { lines: Vec::new(), provenance: Vec::new(), unbreakable: Vec::new() };
    let emit_comments = |out: &mut Rendered, placed: &mut [bool], anchor: Option<u32>, indent: usize| {
        for (i, c) in comments.iter().enumerate() {
            if placed[i] || (anchor.is_some() && anchors[i] != anchor) {
                continue;
            }
            placed[i] = true;
            let pad = " ".repeat(indent);
            for piece in wrap_comment(&c.text, limit.saturating_sub(indent)) {
                out.push(format!("{pad}{piece}"), Some(c.line), false, limit);
            }
        }
    };

    for line in &lines {
        if line.header == Header::Blank {
            out.push(String::new(), None, false, limit);
            continue;
        }
        let orig = (!line.origin.is_synthetic()).then_some(line.origin.line);
        if orig.is_some() {
            emit_comments(&mut out, &mut placed, orig, line.indent());
        }
        let wrapped = wrap_logical(line, limit);
        for text in wrapped.lines {
            out.push(text, orig, wrapped.unbreakable, limit);
        }
    }
    emit_comments(&mut out, &mut placed, None, 0);
    out
}

/// Wrapped canonical text of `module` and the lines left over the limit.
pub fn wrap_lines(module: &ModuleAst, cfg: &CLConfig) -> (String, Vec<Unbreakable>) {
    let r = render(module, &[], cfg.line_limit);
    (r.text(), r.unbreakable)
}

/// Report computed on the rendered form of `module`.
pub fn view_report(
    module: &ModuleAst,
    comments: &[Comment],
    path: &str,
    cfg: &CLConfig,
) -> Result<(Rendered, CognitiveLoadReport), AnalysisError> {
    let rendered = render(module, comments, cfg.line_limit);
    let unit = SourceUnit::new(path, rendered.text());
    let report = cl_report(module, &unit, cfg)?;
    Ok((rendered, report))
}

/// Builds the view of `optimized`, which must derive from `original`.
pub fn emit_view(optimized: &ModuleAst, original: &SourceUnit, cfg: &CLConfig) -> Result<VirtualView, EmitError> {
    let comments = tokenize(original)?.comments;
    let before_ast = parse_source(original)?;
    let report_before = cl_report(&before_ast, original, cfg)?;
    let (rendered, report_after) = view_report(optimized, &comments, &original.path, cfg)?;
    Ok(VirtualView {
        text: rendered.text(),
        provenance: rendered.provenance,
        report_before,
        report_after,
        unbreakable: rendered.unbreakable,
    })
}

use super::ast::*;
use super::token::escape_string;
use super::Span;

/// Binding strength, loosest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Prec {
    Or,
    And,
    Not,
    Cmp,
    Add,
    Mul,
    Unary,
    Postfix,
    Atom,
}

pub fn precedence(e: &Expr) -> Prec {
    match &e.kind {
        ExprKind::Binary(op, _, _) => binop_prec(*op),
        ExprKind::Unary(UnOp::Not, _) => Prec::Not,
        ExprKind::Unary(UnOp::Neg, _) => Prec::Unary,
        ExprKind::Index(..) => Prec::Postfix,
        _ => Prec::Atom,
    }
}

fn binop_prec(op: BinOp) -> Prec {
    match op {
        BinOp::Or => Prec::Or,
        BinOp::And => Prec::And,
        BinOp::Add | BinOp::Sub => Prec::Add,
        BinOp::Mul | BinOp::FloorDiv | BinOp::Mod => Prec::Mul,
        _ => Prec::Cmp,
    }
}

/// Break rank of an operator; commas rank 0, lower ranks are preferred.
fn break_rank(op: BinOp) -> u8 {
    match binop_prec(op) {
        Prec::Or => 1,
        Prec::And => 2,
        Prec::Cmp => 3,
        Prec::Add => 4,
        _ => 5,
    }
}

/// Where a line may be broken: bracket depth and operator rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BreakClass {
    pub depth: u32,
    pub rank: u8,
}

/// One printed token of a logical line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub text: String,
    pub space_before: bool,
    /// Set when a line break may replace the space before this piece.
    pub brk: Option<BreakClass>,
}

/// The first-line content of a statement or definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Header {
    Blank,
    Def { name: String, params: Vec<String> },
    Assign { target: Target, value: Expr },
    If(Expr),
    Elif(Expr),
    Else,
    While(Expr),
    For { var: String, args: Vec<Expr> },
    Return(Option<Expr>),
    Expr(Expr),
    Keyword(&'static str),
}

impl Header {
    /// Expressions that may be parenthesized to make room for line breaks.
    pub fn slots(&self) -> Vec<&Expr> {
        match self {
            Header::Assign { target: Target::Index(_, idx), value } => vec![idx, value],
            Header::Assign { value, .. } => vec![value],
            Header::If(e) | Header::Elif(e) | Header::While(e) | Header::Expr(e) => vec![e],
            Header::Return(Some(e)) => vec![e],
            _ => Vec::new(),
        }
    }
}

/// A physical line of canonical output before wrapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalLine {
    /// Indentation level (multiples of four spaces).
    pub level: usize,
    /// Span of the construct the line was printed from.
    pub origin: Span,
    pub header: Header,
}

impl LogicalLine {
    pub fn indent(&self) -> usize {
        self.level * 4
    }

    pub fn pieces(&self, paren_slot: Option<usize>) -> Vec<Piece> {
        render_header(&self.header, paren_slot)
    }

    pub fn text(&self) -> String {
        if self.header == Header::Blank {
            return String::new();
        }
        format!("{}{}", " ".repeat(self.indent()), join_pieces(&self.pieces(None)))
    }
}

pub fn join_pieces(pieces: &[Piece]) -> String {
    let mut out = String::new();
    for (i, p) in pieces.iter().enumerate() {
        if p.space_before && i > 0 {
            out.push(' ');
        }
        out.push_str(&p.text);
    }
    out
}

/// Canonical source text: four-space indents, one statement per line, one
/// blank line around top-level function definitions.
pub fn print_ast(module: &ModuleAst) -> String {
    let mut out = String::new();
    for line in layout(module) {
        out.push_str(&line.text());
        out.push('\n');
    }
    out
}

pub fn print_expr(e: &Expr) -> String {
    let mut b = Builder::default();
    b.expr(e);
    join_pieces(&b.pieces)
}

/// Flattens a module into canonical logical lines.
pub fn layout(module: &ModuleAst) -> Vec<LogicalLine> {
    let mut lines = Vec::new();
    let mut prev_was_fn: Option<bool> = None;
    for item in &module.items {
        let is_fn = matches!(item, Item::Function(_));
        if let Some(prev) = prev_was_fn {
            if prev || is_fn {
                lines.push(LogicalLine { level: 0, origin: Span::default(), header: Header::Blank });
            }
        }
        prev_was_fn = Some(is_fn);
        layout_item(item, 0, &mut lines);
    }
    lines
}

fn layout_item(item: &Item, level: usize, out: &mut Vec<LogicalLine>) {
    match item {
        Item::Function(f) => {
            out.push(LogicalLine {
                level,
                origin: f.span,
                header: Header::Def { name: f.name.clone(), params: f.params.clone() },
            });
            for inner in &f.body {
                layout_item(inner, level + 1, out);
            }
        }
        Item::Stmt(s) => layout_stmt(s, level, out),
    }
}

fn layout_block(block: &[Stmt], level: usize, out: &mut Vec<LogicalLine>) {
    for s in block {
        layout_stmt(s, level, out);
    }
}

fn layout_stmt(s: &Stmt, level: usize, out: &mut Vec<LogicalLine>) {
    let line = |header| LogicalLine { level, origin: s.span, header };
    match &s.kind {
        StmtKind::If { arms, else_block } => {
            for (i, (cond, body)) in arms.iter().enumerate() {
                let header = if i == 0 { Header::If(cond.clone()) } else { Header::Elif(cond.clone()) };
                let origin = if i == 0 { s.span } else { cond.span };
                out.push(LogicalLine { level, origin, header });
                layout_block(body, level + 1, out);
            }
            if let Some(else_block) = else_block {
                out.push(line(Header::Else));
                layout_block(else_block, level + 1, out);
            }
        }
        StmtKind::While { cond, body } => {
            out.push(line(Header::While(cond.clone())));
            layout_block(body, level + 1, out);
        }
        StmtKind::For { var, args, body } => {
            out.push(line(Header::For { var: var.clone(), args: args.clone() }));
            layout_block(body, level + 1, out);
        }
        StmtKind::Assign { target, value } => {
            out.push(line(Header::Assign { target: target.clone(), value: value.clone() }))
        }
        StmtKind::Return(e) => out.push(line(Header::Return(e.clone()))),
        StmtKind::Expr(e) => out.push(line(Header::Expr(e.clone()))),
        StmtKind::Break => out.push(line(Header::Keyword("break"))),
        StmtKind::Continue => out.push(line(Header::Keyword("continue"))),
        StmtKind::Pass => out.push(line(Header::Keyword("pass"))),
    }
}

fn render_header(header: &Header, paren_slot: Option<usize>) -> Vec<Piece> {
    let mut b = Builder::default();
    let mut slot = 0usize;
    let mut slot_expr = |b: &mut Builder, e: &Expr| {
        let wrap = paren_slot == Some(slot) && needs_wrap_parens(e);
        slot += 1;
        if wrap {
            b.open("(");
            b.expr(e);
            b.close(")");
        } else {
            b.expr(e);
        }
    };
    match header {
        Header::Blank => {}
        Header::Def { name, params } => {
            b.atom("def");
            b.atom(name);
            b.open_glued("(");
            for (i, p) in params.iter().enumerate() {
                if i > 0 {
                    b.comma();
                }
                b.atom(p);
            }
            b.close(")");
            b.glued(":");
        }
        Header::Assign { target, value } => {
            match target {
                Target::Name(n) => b.atom(n),
                Target::Index(n, idx) => {
                    b.atom(n);
                    b.open_glued("[");
                    slot_expr(&mut b, idx);
                    b.close("]");
                }
            }
            b.atom("=");
            slot_expr(&mut b, value);
        }
        Header::If(e) | Header::Elif(e) | Header::While(e) => {
            b.atom(match header {
                Header::If(_) => "if",
                Header::Elif(_) => "elif",
                _ => "while",
            });
            slot_expr(&mut b, e);
            b.glued(":");
        }
        Header::Else => b.atom("else:"),
        Header::For { var, args } => {
            b.atom("for");
            b.atom(var);
            b.atom("in");
            b.atom("range");
            b.open_glued("(");
            b.items(args);
            b.close(")");
            b.glued(":");
        }
        Header::Return(e) => {
            b.atom("return");
            if let Some(e) = e {
                slot_expr(&mut b, e);
            }
        }
        Header::Expr(e) => slot_expr(&mut b, e),
        Header::Keyword(k) => b.atom(k),
    }
    b.pieces
}

/// Expressions whose operators sit outside any bracket until parenthesized.
fn needs_wrap_parens(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Binary(..) | ExprKind::Unary(UnOp::Not, _))
}

#[derive(Default)]
struct Builder {
    pieces: Vec<Piece>,
    depth: u32,
    space_pending: bool,
    pending_break: Option<BreakClass>,
}

impl Builder {
    fn push(&mut self, text: &str, space_before: bool, brk: Option<BreakClass>) {
        let brk = brk.or(self.pending_break.take());
        self.pieces.push(Piece { text: text.to_string(), space_before, brk });
    }

    fn atom(&mut self, text: &str) {
        self.push(text, self.space_pending, None);
        self.space_pending = true;
    }

    /// Attached to the previous piece without a space.
    fn glued(&mut self, text: &str) {
        self.push(text, false, None);
        self.space_pending = true;
    }

    fn open(&mut self, text: &str) {
        self.push(text, self.space_pending, None);
        self.depth += 1;
        self.space_pending = false;
    }

    fn open_glued(&mut self, text: &str) {
        self.push(text, false, None);
        self.depth += 1;
        self.space_pending = false;
    }

    fn close(&mut self, text: &str) {
        self.depth = self.depth.saturating_sub(1);
        self.pending_break = None;
        self.push(text, false, None);
        self.space_pending = true;
    }

    fn comma(&mut self) {
        self.push(",", false, None);
        self.space_pending = true;
        if self.depth > 0 {
            self.pending_break = Some(BreakClass { depth: self.depth, rank: 0 });
        }
    }

    fn op(&mut self, op: BinOp) {
        let brk = (self.depth > 0).then_some(BreakClass { depth: self.depth, rank: break_rank(op) });
        self.push(op.symbol(), true, brk);
        self.space_pending = true;
    }

    fn items(&mut self, items: &[Expr]) {
        for (i, e) in items.iter().enumerate() {
            if i > 0 {
                self.comma();
            }
            self.expr(e);
        }
    }

    fn sub(&mut self, e: &Expr, parens: bool) {
        if parens {
            self.open("(");
            self.expr(e);
            self.close(")");
        } else {
            self.expr(e);
        }
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Int(n) => self.atom(&n.to_string()),
            ExprKind::Str(s) => self.atom(&escape_string(s)),
            ExprKind::Bool(true) => self.atom("True"),
            ExprKind::Bool(false) => self.atom("False"),
            ExprKind::None => self.atom("None"),
            ExprKind::Name(n) => self.atom(n),
            ExprKind::List(items) => {
                self.open("[");
                self.items(items);
                self.close("]");
            }
            ExprKind::Call(name, args) => {
                self.atom(name);
                self.open_glued("(");
                self.items(args);
                self.close(")");
            }
            ExprKind::Index(base, idx) => {
                self.sub(base, precedence(base) < Prec::Postfix);
                self.open_glued("[");
                self.expr(idx);
                self.close("]");
            }
            ExprKind::Unary(UnOp::Neg, operand) => {
                self.push("-", self.space_pending, None);
                self.space_pending = false;
                self.sub(operand, precedence(operand) <= Prec::Unary);
            }
            ExprKind::Unary(UnOp::Not, operand) => {
                self.atom("not");
                self.sub(operand, precedence(operand) < Prec::Not);
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let p = binop_prec(*op);
                let lp = precedence(lhs);
                self.sub(lhs, lp < p || (p == Prec::Cmp && lp == Prec::Cmp));
                self.op(*op);
                self.sub(rhs, precedence(rhs) <= p);
            }
        }
    }
}

use std::collections::BTreeSet;

use super::ast::*;
use super::token::unescape;
use super::{tokenize, SourceUnit, Span, SyntaxError, Token, TokenKind};

/// Bound on syntactic recursion (blocks plus expression depth).
pub const MAX_NESTING: usize = 100;

type PResult<T> = Result<T, SyntaxError>;

/// Parses a token stream and runs static resolution.
pub fn parse(tokens: &[Token]) -> PResult<ModuleAst> {
    let mut parser = Parser { tokens, pos: 0, depth: 0, in_function: false, loops: 0, last: Span::default() };
    let module = parser.module()?;
    resolve(&module)?;
    Ok(module)
}

pub fn parse_source(source: &SourceUnit) -> PResult<ModuleAst> {
    parse(&tokenize(source)?.tokens)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    depth: usize,
    in_function: bool,
    loops: usize,
    /// Span of the last significant token consumed.
    last: Span,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> &'t Token {
        let tok = self.peek();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        if !matches!(tok.kind, TokenKind::Newline | TokenKind::Indent | TokenKind::Dedent | TokenKind::Eof) {
            self.last = tok.span;
        }
        tok
    }

    fn unexpected<T>(&self, expected: &[&str]) -> PResult<T> {
        let tok = self.peek();
        Err(SyntaxError::UnexpectedToken {
            span: tok.span,
            found: tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect_op(&mut self, op: &str) -> PResult<&'t Token> {
        if self.peek().is_op(op) {
            Ok(self.bump())
        } else {
            self.unexpected(&[&format!("'{op}'")])
        }
    }

    fn expect_kind(&mut self, kind: TokenKind, what: &str) -> PResult<&'t Token> {
        if self.peek().kind == kind {
            Ok(self.bump())
        } else {
            self.unexpected(&[what])
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(SyntaxError::NestingTooDeep(self.peek().span));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn module(&mut self) -> PResult<ModuleAst> {
        let mut items = Vec::new();
        while self.peek().kind != TokenKind::Eof {
            items.push(self.item()?);
        }
        Ok(ModuleAst { items })
    }

    fn item(&mut self) -> PResult<Item> {
        if self.peek().is_keyword("def") {
            Ok(Item::Function(self.function()?))
        } else {
            Ok(Item::Stmt(self.stmt()?))
        }
    }

    fn function(&mut self) -> PResult<FunctionDef> {
        self.enter()?;
        let start = self.bump().span;
        let name = self.expect_kind(TokenKind::Ident, "function name")?.lexeme.clone();
        self.expect_op("(")?;
        let mut params: Vec<String> = Vec::new();
        if !self.peek().is_op(")") {
            loop {
                let tok = self.expect_kind(TokenKind::Ident, "parameter name")?;
                if params.contains(&tok.lexeme) {
                    return Err(SyntaxError::DuplicateParam { span: tok.span, name: tok.lexeme.clone() });
                }
                params.push(tok.lexeme.clone());
                if !self.peek().is_op(",") {
                    break;
                }
                self.bump();
            }
        }
        self.expect_op(")")?;
        self.expect_op(":")?;
        self.expect_kind(TokenKind::Newline, "end of line")?;
        self.expect_kind(TokenKind::Indent, "indented block")?;
        let (outer_fn, outer_loops) = (self.in_function, self.loops);
        self.in_function = true;
        self.loops = 0;
        let mut body = Vec::new();
        while self.peek().kind != TokenKind::Dedent {
            body.push(self.item()?);
        }
        self.bump();
        self.in_function = outer_fn;
        self.loops = outer_loops;
        self.leave();
        Ok(FunctionDef { name, params, body, span: start.to(self.last) })
    }

    fn block(&mut self) -> PResult<Block> {
        self.expect_kind(TokenKind::Newline, "end of line")?;
        self.expect_kind(TokenKind::Indent, "indented block")?;
        let mut stmts = Vec::new();
        while self.peek().kind != TokenKind::Dedent {
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(stmts)
    }

    fn loop_block(&mut self) -> PResult<Block> {
        self.loops += 1;
        let body = self.block();
        self.loops -= 1;
        body
    }

    fn end_simple(&mut self) -> PResult<()> {
        self.expect_kind(TokenKind::Newline, "end of line").map(|_| ())
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        self.enter()?;
        let tok = self.peek();
        let start = tok.span;
        let kind = match (tok.kind, tok.lexeme.as_str()) {
            (TokenKind::Keyword, "if") => self.if_stmt()?,
            (TokenKind::Keyword, "while") => {
                self.bump();
                let cond = self.expr()?;
                self.expect_op(":")?;
                let body = self.loop_block()?;
                StmtKind::While { cond, body }
            }
            (TokenKind::Keyword, "for") => self.for_stmt()?,
            (TokenKind::Keyword, "return") => {
                self.bump();
                if !self.in_function {
                    return Err(SyntaxError::ReturnOutsideFunction(start));
                }
                let value = if self.peek().kind == TokenKind::Newline { None } else { Some(self.expr()?) };
                self.end_simple()?;
                StmtKind::Return(value)
            }
            (TokenKind::Keyword, kw @ ("break" | "continue")) => {
                self.bump();
                if self.loops == 0 {
                    return Err(SyntaxError::BreakOutsideLoop { span: start, keyword: kw.to_string() });
                }
                self.end_simple()?;
                if kw == "break" {
                    StmtKind::Break
                } else {
                    StmtKind::Continue
                }
            }
            (TokenKind::Keyword, "pass") => {
                self.bump();
                self.end_simple()?;
                StmtKind::Pass
            }
            _ => {
                let expr = self.expr()?;
                if self.peek().is_op("=") {
                    let target = match expr.kind {
                        ExprKind::Name(n) => Target::Name(n),
                        ExprKind::Index(base, idx) => match base.kind {
                            ExprKind::Name(n) => Target::Index(n, *idx),
                            _ => return Err(SyntaxError::InvalidTarget(expr.span)),
                        },
                        _ => return Err(SyntaxError::InvalidTarget(expr.span)),
                    };
                    self.bump();
                    let value = self.expr()?;
                    self.end_simple()?;
                    StmtKind::Assign { target, value }
                } else {
                    self.end_simple()?;
                    StmtKind::Expr(expr)
                }
            }
        };
        self.leave();
        Ok(Stmt::new(kind, start.to(self.last)))
    }

    fn if_stmt(&mut self) -> PResult<StmtKind> {
        self.bump();
        let mut arms = Vec::new();
        let cond = self.expr()?;
        self.expect_op(":")?;
        arms.push((cond, self.block()?));
        let mut else_block = None;
        loop {
            if self.peek().is_keyword("elif") {
                self.bump();
                let cond = self.expr()?;
                self.expect_op(":")?;
                arms.push((cond, self.block()?));
            } else if self.peek().is_keyword("else") {
                self.bump();
                self.expect_op(":")?;
                else_block = Some(self.block()?);
                break;
            } else {
                break;
            }
        }
        Ok(StmtKind::If { arms, else_block })
    }

    fn for_stmt(&mut self) -> PResult<StmtKind> {
        self.bump();
        let var = self.expect_kind(TokenKind::Ident, "loop variable")?.lexeme.clone();
        if !self.peek().is_keyword("in") {
            return self.unexpected(&["'in'"]);
        }
        self.bump();
        if !self.peek().is(TokenKind::Ident, "range") {
            return self.unexpected(&["'range'"]);
        }
        self.bump();
        self.expect_op("(")?;
        let mut args = vec![self.expr()?];
        while self.peek().is_op(",") && args.len() < 3 {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect_op(")")?;
        self.expect_op(":")?;
        let body = self.loop_block()?;
        Ok(StmtKind::For { var, args, body })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let e = self.or_expr();
        self.leave();
        e
    }

    fn binary_chain(
        &mut self,
        ops: &[&str],
        next: fn(&mut Self) -> PResult<Expr>,
    ) -> PResult<Expr> {
        let mut lhs = next(self)?;
        loop {
            let tok = self.peek();
            if !matches!(tok.kind, TokenKind::Op | TokenKind::Keyword) || !ops.contains(&tok.lexeme.as_str()) {
                return Ok(lhs);
            }
            let op = BinOp::from_symbol(&tok.lexeme).expect("operator table is consistent");
            self.bump();
            let rhs = next(self)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        self.binary_chain(&["or"], Self::and_expr)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        self.binary_chain(&["and"], Self::not_expr)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.peek().is_keyword("not") {
            self.enter()?;
            let start = self.bump().span;
            let operand = self.not_expr()?;
            self.leave();
            let span = start.to(operand.span);
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(operand)), span));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        const CMP: [&str; 6] = ["==", "!=", "<", "<=", ">", ">="];
        let lhs = self.arith()?;
        let tok = self.peek();
        if tok.kind != TokenKind::Op || !CMP.contains(&tok.lexeme.as_str()) {
            return Ok(lhs);
        }
        let op = BinOp::from_symbol(&tok.lexeme).expect("comparison symbol");
        self.bump();
        let rhs = self.arith()?;
        let next = self.peek();
        if next.kind == TokenKind::Op && CMP.contains(&next.lexeme.as_str()) {
            return Err(SyntaxError::ChainedComparison(next.span));
        }
        let span = lhs.span.to(rhs.span);
        Ok(Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span))
    }

    fn arith(&mut self) -> PResult<Expr> {
        self.binary_chain(&["+", "-"], Self::term)
    }

    fn term(&mut self) -> PResult<Expr> {
        self.binary_chain(&["*", "//", "%"], Self::unary)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.peek().is_op("-") {
            self.enter()?;
            let start = self.bump().span;
            let operand = self.unary()?;
            self.leave();
            let span = start.to(operand.span);
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(operand)), span));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut base = self.atom()?;
        while self.peek().is_op("[") {
            self.bump();
            let index = self.expr()?;
            self.expect_op("]")?;
            let span = base.span.to(self.last);
            base = Expr::new(ExprKind::Index(Box::new(base), Box::new(index)), span);
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let tok = self.peek();
        let span = tok.span;
        let kind = match tok.kind {
            TokenKind::Int => {
                self.bump();
                ExprKind::Int(tok.lexeme.parse().map_err(|_| SyntaxError::IntegerTooLarge(span))?)
            }
            TokenKind::Str => {
                self.bump();
                ExprKind::Str(unescape(&tok.lexeme).ok_or(SyntaxError::BadEscape(span))?)
            }
            TokenKind::Keyword if matches!(tok.lexeme.as_str(), "True" | "False") => {
                self.bump();
                ExprKind::Bool(tok.lexeme == "True")
            }
            TokenKind::Keyword if tok.lexeme == "None" => {
                self.bump();
                ExprKind::None
            }
            TokenKind::Ident => {
                self.bump();
                if self.peek().is_op("(") {
                    self.bump();
                    let args = self.expr_list(")")?;
                    ExprKind::Call(tok.lexeme.clone(), args)
                } else {
                    ExprKind::Name(tok.lexeme.clone())
                }
            }
            TokenKind::Op if tok.lexeme == "[" => {
                self.bump();
                ExprKind::List(self.expr_list("]")?)
            }
            TokenKind::Op if tok.lexeme == "(" => {
                self.bump();
                let inner = self.expr()?;
                self.expect_op(")")?;
                return Ok(Expr::new(inner.kind, span.to(self.last)));
            }
            _ => return self.unexpected(&["expression"]),
        };
        Ok(Expr::new(kind, span.to(self.last)))
    }

    /// Comma-separated expressions up to and including `close`.
    fn expr_list(&mut self, close: &str) -> PResult<Vec<Expr>> {
        let mut items = Vec::new();
        if self.peek().is_op(close) {
            self.bump();
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if self.peek().is_op(",") {
                self.bump();
                continue;
            }
            if self.peek().is_op(close) {
                self.bump();
                return Ok(items);
            }
            return self.unexpected(&["','", &format!("'{close}'")]);
        }
    }
}

/// Names bound in a function's own scope: parameters, assignment targets and
/// loop variables (nested definitions excluded).
pub(crate) fn scope_locals(params: &[String], stmts: &[&Stmt]) -> BTreeSet<String> {
    let mut locals: BTreeSet<String> = params.iter().cloned().collect();
    for stmt in stmts {
        stmt.walk(&mut |s| match &s.kind {
            StmtKind::Assign { target: Target::Name(n), .. } | StmtKind::For { var: n, .. } => {
                locals.insert(n.clone());
            }
            _ => {}
        });
    }
    locals
}

struct Scope {
    locals: BTreeSet<String>,
    functions: BTreeSet<String>,
}

fn resolve(module: &ModuleAst) -> PResult<()> {
    check_unique(&module.items)?;
    for f in module.functions() {
        resolve_function(f, &mut Vec::new())?;
    }
    Ok(())
}

fn check_unique(items: &[Item]) -> PResult<()> {
    let mut seen = BTreeSet::new();
    for f in items.iter().filter_map(Item::as_function) {
        if !seen.insert(f.name.as_str()) {
            return Err(SyntaxError::DuplicateFunction { span: f.span, name: f.name.clone() });
        }
    }
    Ok(())
}

fn resolve_function(f: &FunctionDef, enclosing: &mut Vec<Scope>) -> PResult<()> {
    check_unique(&f.body)?;
    let stmts: Vec<&Stmt> = f.statements().collect();
    let scope = Scope {
        locals: scope_locals(&f.params, &stmts),
        functions: f.nested().map(|n| n.name.clone()).collect(),
    };
    if !enclosing.is_empty() {
        let mut violation = None;
        for stmt in &stmts {
            stmt.walk(&mut |s| {
                for e in s.exprs() {
                    e.walk(&mut |e| {
                        if violation.is_some() {
                            return;
                        }
                        match &e.kind {
                            ExprKind::Name(n) if !scope.locals.contains(n) => {
                                if enclosing.iter().any(|sc| sc.locals.contains(n)) {
                                    violation = Some((e.span, n.clone()));
                                }
                            }
                            ExprKind::Call(c, _) if !scope.functions.contains(c)
                                && enclosing.iter().any(|sc| sc.functions.contains(c)) => {
                                    violation = Some((e.span, c.clone()));
                                }
                            _ => {}
                        }
                    });
                }
            });
        }
        if let Some((span, name)) = violation {
            return Err(SyntaxError::NestedCaptureViolation { span, name });
        }
    }
    enclosing.push(scope);
    for nested in f.nested() {
        resolve_function(nested, enclosing)?;
    }
    enclosing.pop();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_str(src: &str) -> PResult<ModuleAst> {
        parse_source(&SourceUnit::new("t.mpy", src))
    }

    fn int(n: i64) -> Expr {
        Expr::new(ExprKind::Int(n), Span::default())
    }

    fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::new(ExprKind::Binary(op, Box::new(a), Box::new(b)), Span::default())
    }

    #[test]
    fn precedence_of_sum_and_product() {
        let m = parse_str("x = 1 + 2 * 3\n").unwrap().without_spans();
        let expected = Stmt::new(
            StmtKind::Assign {
                target: Target::Name("x".into()),
                value: bin(BinOp::Add, int(1), bin(BinOp::Mul, int(2), int(3))),
            },
            Span::default(),
        );
        assert_eq!(m.items, vec![Item::Stmt(expected)]);
    }

    #[test]
    fn pass_module() {
        let m = parse_str("pass\n").unwrap();
        assert_eq!(m.items.len(), 1);
        assert!(matches!(&m.items[0], Item::Stmt(Stmt { kind: StmtKind::Pass, .. })));
    }

    #[test]
    fn smallest_function() {
        let m = parse_str("def f():\n    return\n").unwrap();
        let f = m.function("f").unwrap();
        assert!(f.params.is_empty());
        assert_eq!(f.body.len(), 1);
        assert!(matches!(f.body[0].as_stmt().unwrap().kind, StmtKind::Return(None)));
    }

    #[test]
    fn not_binds_looser_than_comparison() {
        let m = parse_str("x = not a > 0 and b\n").unwrap().without_spans();
        let Item::Stmt(Stmt { kind: StmtKind::Assign { value, .. }, .. }) = &m.items[0] else {
            panic!("expected assignment");
        };
        let ExprKind::Binary(BinOp::And, lhs, _) = &value.kind else { panic!("and at root") };
        assert!(matches!(&lhs.kind, ExprKind::Unary(UnOp::Not, inner)
            if matches!(inner.kind, ExprKind::Binary(BinOp::Gt, _, _))));
    }

    #[test]
    fn unary_minus_binds_tightest() {
        let m = parse_str("x = -a * b\n").unwrap();
        let Item::Stmt(Stmt { kind: StmtKind::Assign { value, .. }, .. }) = &m.items[0] else {
            panic!()
        };
        assert!(matches!(&value.kind, ExprKind::Binary(BinOp::Mul, l, _)
            if matches!(l.kind, ExprKind::Unary(UnOp::Neg, _))));
    }

    #[test]
    fn static_errors() {
        let kind = |s: &str| parse_str(s).unwrap_err().kind();
        assert_eq!(kind("return 1\n"), "ReturnOutsideFunction");
        assert_eq!(kind("break\n"), "BreakOutsideLoop");
        assert_eq!(kind("def f():\n    continue\n"), "BreakOutsideLoop");
        assert_eq!(kind("def f(a, a):\n    pass\n"), "DuplicateParam");
        assert_eq!(kind("def f():\n    pass\ndef f():\n    pass\n"), "DuplicateFunction");
        assert_eq!(kind("x = a < b < c\n"), "ChainedComparison");
        assert_eq!(kind("f(x) = 1\n"), "InvalidTarget");
        assert_eq!(kind("x = (1\n"), "UnexpectedToken");
        assert_eq!(kind("if a:\n    def g():\n        pass\n"), "UnexpectedToken");
        assert_eq!(
            kind("def f(a):\n    def g():\n        return a\n    return g()\n"),
            "NestedCaptureViolation"
        );
    }

    #[test]
    fn loop_context_does_not_leak_into_nested_function() {
        let src = "def f():\n    while True:\n        def g():\n            break\n";
        // `def` is not a statement inside a loop body.
        assert!(parse_str(src).is_err());
        let src = "def f():\n    def g():\n        break\n    while True:\n        break\n";
        assert_eq!(parse_str(src).unwrap_err().kind(), "BreakOutsideLoop");
    }

    #[test]
    fn capture_free_nested_function_is_accepted() {
        let src = "def f(a):\n    def g(b):\n        c = b + 1\n        return c\n    return g(a)\n";
        assert!(parse_str(src).is_ok());
    }

    #[test]
    fn deep_nesting_is_rejected_not_crashed() {
        let src = format!("x = {}1{}\n", "(".repeat(500), ")".repeat(500));
        assert_eq!(parse_str(&src).unwrap_err().kind(), "NestingTooDeep");
    }

    #[test]
    fn spans_cover_compound_statements() {
        let m = parse_str("if a:\n    b = 1\nelse:\n    b = 2\n").unwrap();
        let span = m.items[0].span();
        assert_eq!((span.line, span.end_line), (1, 4));
    }
}

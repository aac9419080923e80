//! MiniPy front end: tokens and syntax trees, with a canonical printer.
//!
//! MiniPy is a small indentation-based imperative language: functions
//! (optionally nested), `if`/`elif`/`else`, `while`, `for ... in range(...)`,
//! integers, strings, booleans, `None` and lists.

mod ast;
mod lexer;
mod parser;
mod printer;
mod source;
mod token;

pub use ast::{
    block_ends_in_return, BinOp, Block, Expr, ExprKind, FunctionDef, Item, ModuleAst, Stmt, StmtKind, Target, UnOp,
};
pub use lexer::{tokenize, Comment, Lexed};
pub use parser::{parse, parse_source, MAX_NESTING};
pub use printer::{
    join_pieces, layout, precedence, print_ast, print_expr, BreakClass, Header, LogicalLine, Piece,
    Prec,
};
pub(crate) use parser::scope_locals;
pub use source::{SourceUnit, Span};
pub use token::{escape_string, is_identifier, unescape, Token, TokenKind, KEYWORDS};

use thiserror::Error;

/// Errors raised while reading or resolving a source unit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("source is not valid UTF-8")]
    InvalidUtf8(Span),
    #[error("tab character")]
    TabCharacter(Span),
    #[error("indentation is not a multiple of 4 or dedents to an unseen level")]
    BadIndent(Span),
    #[error("unterminated string literal")]
    UnterminatedString(Span),
    #[error("unsupported escape sequence in string literal")]
    BadEscape(Span),
    #[error("unknown character {ch:?}")]
    UnknownChar { span: Span, ch: char },
    #[error("integer literal does not fit in 64 bits")]
    IntegerTooLarge(Span),
    #[error("unexpected {found}, expected {}", expected.join(" or "))]
    UnexpectedToken {
        span: Span,
        found: String,
        expected: Vec<String>,
    },
    #[error("invalid assignment target")]
    InvalidTarget(Span),
    #[error("comparison operators cannot be chained")]
    ChainedComparison(Span),
    #[error("'return' outside function")]
    ReturnOutsideFunction(Span),
    #[error("'{keyword}' outside loop")]
    BreakOutsideLoop { span: Span, keyword: String },
    #[error("duplicate parameter '{name}'")]
    DuplicateParam { span: Span, name: String },
    #[error("duplicate function '{name}' at one nesting level")]
    DuplicateFunction { span: Span, name: String },
    #[error("nested function references enclosing local '{name}'")]
    NestedCaptureViolation { span: Span, name: String },
    #[error("nesting exceeds {MAX_NESTING} levels")]
    NestingTooDeep(Span),
}

impl SyntaxError {
    pub fn span(&self) -> Span {
        use SyntaxError::*;
        match self {
            InvalidUtf8(s) | TabCharacter(s) | BadIndent(s) | UnterminatedString(s)
            | BadEscape(s) | IntegerTooLarge(s) | InvalidTarget(s) | ChainedComparison(s)
            | ReturnOutsideFunction(s) | NestingTooDeep(s) => *s,
            UnknownChar { span, .. }
            | UnexpectedToken { span, .. }
            | BreakOutsideLoop { span, .. }
            | DuplicateParam { span, .. }
            | DuplicateFunction { span, .. }
            | NestedCaptureViolation { span, .. } => *span,
        }
    }

    /// Stable kind name used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        use SyntaxError::*;
        match self {
            InvalidUtf8(_) => "InvalidUtf8",
            TabCharacter(_) => "TabCharacter",
            BadIndent(_) => "BadIndent",
            UnterminatedString(_) => "UnterminatedString",
            BadEscape(_) => "BadEscape",
            UnknownChar { .. } => "UnknownChar",
            IntegerTooLarge(_) => "IntegerTooLarge",
            UnexpectedToken { .. } => "UnexpectedToken",
            InvalidTarget(_) => "InvalidTarget",
            ChainedComparison(_) => "ChainedComparison",
            ReturnOutsideFunction(_) => "ReturnOutsideFunction",
            BreakOutsideLoop { .. } => "BreakOutsideLoop",
            DuplicateParam { .. } => "DuplicateParam",
            DuplicateFunction { .. } => "DuplicateFunction",
            NestedCaptureViolation { .. } => "NestedCaptureViolation",
            NestingTooDeep(_) => "NestingTooDeep",
        }
    }
}

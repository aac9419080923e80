use super::token::{unescape, KEYWORDS};
use super::{SourceUnit, Span, SyntaxError, Token, TokenKind};

/// A `#` comment. Comments are not tokens; they ride along for re-attachment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub line: u32,
    pub col: u32,
    /// Comment text including the leading `#`, trailing spaces trimmed.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
}

const TWO_CHAR_OPS: &[&str] = &["==", "!=", "<=", ">=", "//"];
const ONE_CHAR_OPS: &str = "()[],:=<>+-*%";

pub fn tokenize(source: &SourceUnit) -> Result<Lexed, SyntaxError> {
    Lexer::default().run(&source.content)
}

#[derive(Default)]
struct Lexer {
    tokens: Vec<Token>,
    comments: Vec<Comment>,
    indents: Vec<usize>,
    brackets: usize,
}

impl Lexer {
    fn run(mut self, content: &str) -> Result<Lexed, SyntaxError> {
        self.indents.push(0);
        let mut last_line = 0u32;
        for (idx, raw_line) in content.split('\n').enumerate() {
            let line_no = idx as u32 + 1;
            last_line = line_no;
            let chars: Vec<char> = raw_line.chars().collect();
            if let Some(col) = chars.iter().position(|&c| c == '\t') {
                let col = col as u32 + 1;
                return Err(SyntaxError::TabCharacter(Span::new(line_no, col, line_no, col + 1)));
            }
            self.lex_line(line_no, &chars)?;
        }
        let eof_line = last_line.max(1);
        let eof = Span::point(eof_line, 1);
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(TokenKind::Dedent, "", eof);
        }
        self.push(TokenKind::Eof, "", eof);
        Ok(Lexed { tokens: self.tokens, comments: self.comments })
    }

    fn push(&mut self, kind: TokenKind, lexeme: &str, span: Span) {
        self.tokens.push(Token { kind, lexeme: lexeme.to_string(), span });
    }

    fn lex_line(&mut self, line: u32, chars: &[char]) -> Result<(), SyntaxError> {
        let mut pos = 0;
        let starts_logical = self.brackets == 0;
        if starts_logical {
            while pos < chars.len() && (chars[pos] == ' ' || chars[pos] == '\r') {
                pos += 1;
            }
            let blank = pos == chars.len() || chars[pos] == '#';
            if !blank {
                self.indent_to(line, pos)?;
            }
        }
        let mut emitted = false;
        while pos < chars.len() {
            let c = chars[pos];
            let col = pos as u32 + 1;
            match c {
                ' ' | '\r' => pos += 1,
                '#' => {
                    let text: String = chars[pos..].iter().collect();
                    self.comments.push(Comment { line, col, text: text.trim_end().to_string() });
                    break;
                }
                '"' | '\'' => {
                    pos = self.lex_string(line, chars, pos)?;
                    emitted = true;
                }
                '0'..='9' => {
                    let start = pos;
                    while pos < chars.len() && chars[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    let text: String = chars[start..pos].iter().collect();
                    let span = Span::new(line, col, line, pos as u32 + 1);
                    if text.parse::<i64>().is_err() {
                        return Err(SyntaxError::IntegerTooLarge(span));
                    }
                    self.push(TokenKind::Int, &text, span);
                    emitted = true;
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = pos;
                    while pos < chars.len() && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '_') {
                        pos += 1;
                    }
                    let text: String = chars[start..pos].iter().collect();
                    let kind = if KEYWORDS.contains(&text.as_str()) {
                        TokenKind::Keyword
                    } else {
                        TokenKind::Ident
                    };
                    self.push(kind, &text, Span::new(line, col, line, pos as u32 + 1));
                    emitted = true;
                }
                _ => {
                    let pair: String = chars[pos..chars.len().min(pos + 2)].iter().collect();
                    let op = if TWO_CHAR_OPS.contains(&pair.as_str()) {
                        pair
                    } else if ONE_CHAR_OPS.contains(c) {
                        c.to_string()
                    } else {
                        return Err(SyntaxError::UnknownChar {
                            span: Span::new(line, col, line, col + 1),
                            ch: c,
                        });
                    };
                    match op.as_str() {
                        "(" | "[" => self.brackets += 1,
                        ")" | "]" => self.brackets = self.brackets.saturating_sub(1),
                        _ => {}
                    }
                    let width = op.chars().count();
                    self.push(TokenKind::Op, &op, Span::new(line, col, line, col + width as u32));
                    pos += width;
                    emitted = true;
                }
            }
        }
        let logical_open = emitted || !starts_logical;
        if self.brackets == 0 && logical_open && self.tokens.last().is_some_and(|t| t.kind != TokenKind::Newline) {
            let col = chars.len() as u32 + 1;
            self.push(TokenKind::Newline, "", Span::point(line, col));
        }
        Ok(())
    }

    fn indent_to(&mut self, line: u32, width: usize) -> Result<(), SyntaxError> {
        let span = Span::new(line, 1, line, width as u32 + 1);
        if !width.is_multiple_of(4) {
            return Err(SyntaxError::BadIndent(span));
        }
        let current = *self.indents.last().expect("indent stack is never empty");
        if width > current {
            self.indents.push(width);
            self.push(TokenKind::Indent, "", Span::point(line, width as u32 + 1));
        } else {
            while width < *self.indents.last().expect("indent stack is never empty") {
                self.indents.pop();
                self.push(TokenKind::Dedent, "", Span::point(line, width as u32 + 1));
            }
            if width != *self.indents.last().expect("indent stack is never empty") {
                return Err(SyntaxError::BadIndent(span));
            }
        }
        Ok(())
    }

    fn lex_string(&mut self, line: u32, chars: &[char], start: usize) -> Result<usize, SyntaxError> {
        let quote = chars[start];
        let mut pos = start + 1;
        loop {
            match chars.get(pos) {
                None | Some('\r') => {
                    return Err(SyntaxError::UnterminatedString(Span::new(
                        line,
                        start as u32 + 1,
                        line,
                        pos as u32 + 1,
                    )))
                }
                Some('\\') => pos += 2,
                Some(&c) if c == quote => break,
                Some(_) => pos += 1,
            }
        }
        if pos >= chars.len() {
            return Err(SyntaxError::UnterminatedString(Span::new(
                line,
                start as u32 + 1,
                line,
                chars.len() as u32 + 1,
            )));
        }
        let raw: String = chars[start..=pos].iter().collect();
        let span = Span::new(line, start as u32 + 1, line, pos as u32 + 2);
        if unescape(&raw).is_none() {
            return Err(SyntaxError::BadEscape(span));
        }
        self.push(TokenKind::Str, &raw, span);
        Ok(pos + 1)
    }
}

use serde::Serialize;

use super::SyntaxError;

/// Line/column range in a source unit. Lines and columns are 1-based and
/// counted in code points; `end_col` is exclusive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32, end_line: u32, end_col: u32) -> Self {
        Span { line, col, end_line, end_col }
    }

    pub fn point(line: u32, col: u32) -> Self {
        Span::new(line, col, line, col)
    }

    /// Smallest span covering both.
    pub fn to(self, other: Span) -> Span {
        let (line, col) = (self.line, self.col).min((other.line, other.col));
        let (end_line, end_col) = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        Span { line, col, end_line, end_col }
    }

    /// Synthetic nodes carry an all-zero span.
    pub fn is_synthetic(&self) -> bool {
        self.line == 0
    }
}

/// A file's text together with the byte offset at which every line starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub path: String,
    pub content: String,
    pub line_index: Vec<usize>,
}

impl SourceUnit {
    pub fn new(path: impl Into<String>, content: impl Into<String>) -> Self {
        let content = content.into();
        let mut line_index = vec![0];
        line_index.extend(content.match_indices('\n').map(|(i, _)| i + 1));
        SourceUnit { path: path.into(), content, line_index }
    }

    pub fn from_bytes(path: impl Into<String>, bytes: &[u8]) -> Result<Self, SyntaxError> {
        match std::str::from_utf8(bytes) {
            Ok(text) => Ok(SourceUnit::new(path, text)),
            Err(e) => {
                let prefix = &bytes[..e.valid_up_to()];
                let line = prefix.iter().filter(|&&b| b == b'\n').count() as u32 + 1;
                Err(SyntaxError::InvalidUtf8(Span::point(line, 1)))
            }
        }
    }

    /// Text of 1-based line `n` without its terminating newline.
    pub fn line(&self, n: usize) -> Option<&str> {
        let start = *self.line_index.get(n.checked_sub(1)?)?;
        let end = self
            .line_index
            .get(n)
            .map(|&next| next - 1)
            .unwrap_or(self.content.len());
        Some(&self.content[start..end])
    }

    /// Every line of the unit. A trailing newline does not open an extra line.
    pub fn lines(&self) -> Vec<&str> {
        let mut count = self.line_index.len();
        if self.content.is_empty() || self.content.ends_with('\n') {
            count -= 1;
        }
        (1..=count).filter_map(|n| self.line(n)).collect()
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

/// Half-open range of character (not byte) offsets into a source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    pub fn contains(self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn is_empty(self) -> bool {
        self.start == self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Maps character offsets back to line/column positions and byte ranges.
#[derive(Clone, Debug)]
pub struct SourceMap {
    text: String,
    /// Byte offset of every character, plus one trailing entry for the end.
    byte_of_char: Vec<usize>,
    line_starts: Vec<usize>,
}

impl SourceMap {
    pub fn new(text: &str) -> Self {
        let mut byte_of_char = Vec::with_capacity(text.len() + 1);
        let mut line_starts = vec![0];
        for (ci, (bi, ch)) in text.char_indices().enumerate() {
            byte_of_char.push(bi);
            if ch == '\n' {
                line_starts.push(ci + 1);
            }
        }
        byte_of_char.push(text.len());
        SourceMap {
            text: text.to_string(),
            byte_of_char,
            line_starts,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn char_len(&self) -> usize {
        self.byte_of_char.len() - 1
    }

    /// Source text covered by `span`; clamps out-of-range spans.
    pub fn slice(&self, span: Span) -> &str {
        let n = self.char_len();
        let s = self.byte_of_char[span.start.min(n)];
        let e = self.byte_of_char[span.end.min(n)];
        &self.text[s..e]
    }

    /// 1-based line and column of a character offset.
    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (line + 1, offset - self.line_starts[line] + 1)
    }

    pub fn render(&self, span: Span) -> String {
        let (l, c) = self.line_col(span.start);
        format!("{l}:{c}")
    }
}

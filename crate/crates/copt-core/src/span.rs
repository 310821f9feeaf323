//! Source locations. All positions are 1-based; generated nodes use the
//! zeroed synthetic span.

use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line_start: u32,
    pub col_start: u32,
    pub line_end: u32,
    pub col_end: u32,
}

impl SourceSpan {
    pub fn new(
        file: Arc<str>,
        line_start: u32,
        col_start: u32,
        line_end: u32,
        col_end: u32,
    ) -> Self {
        debug_assert!(
            line_start < line_end || (line_start == line_end && col_start <= col_end),
            "span end precedes its start"
        );
        SourceSpan {
            file,
            line_start,
            col_start,
            line_end,
            col_end,
        }
    }

    /// Single-position span, used for point diagnostics.
    pub fn point(file: Arc<str>, line: u32, col: u32) -> Self {
        SourceSpan::new(file, line, col, line, col)
    }

    /// Span for nodes created by rewrites; never matches a parsed node.
    pub fn synthetic() -> Self {
        SourceSpan {
            file: Arc::from(""),
            line_start: 0,
            col_start: 0,
            line_end: 0,
            col_end: 0,
        }
    }

    pub fn is_synthetic(&self) -> bool {
        self.line_start == 0
    }

    /// Smallest span covering both inputs (assumes same file).
    pub fn merge(&self, other: &SourceSpan) -> SourceSpan {
        let (ls, cs) = if (self.line_start, self.col_start) <= (other.line_start, other.col_start) {
            (self.line_start, self.col_start)
        } else {
            (other.line_start, other.col_start)
        };
        let (le, ce) = if (self.line_end, self.col_end) >= (other.line_end, other.col_end) {
            (self.line_end, self.col_end)
        } else {
            (other.line_end, other.col_end)
        };
        SourceSpan {
            file: self.file.clone(),
            line_start: ls,
            col_start: cs,
            line_end: le,
            col_end: ce,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.file.is_empty() {
            write!(f, "<generated>")
        } else {
            write!(f, "{}:{}:{}", self.file, self.line_start, self.col_start)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_covers_both_spans() {
        let f: Arc<str> = Arc::from("x.c");
        let a = SourceSpan::new(f.clone(), 1, 5, 1, 9);
        let b = SourceSpan::new(f.clone(), 2, 1, 2, 4);
        let m = a.merge(&b);
        assert_eq!(
            (m.line_start, m.col_start, m.line_end, m.col_end),
            (1, 5, 2, 4)
        );
    }

    #[test]
    fn display_points_at_start() {
        let s = SourceSpan::new(Arc::from("heap.c"), 3, 7, 3, 12);
        assert_eq!(s.to_string(), "heap.c:3:7");
    }
}

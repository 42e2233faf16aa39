use serde::Serialize;

use super::source::SourceModule;
use crate::{Error, Result};

/// Replace the bytes `start..end` of the original text with `replacement`.
/// An empty range is an insertion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SpanEdit {
    pub start: usize,
    pub end: usize,
    pub replacement: String,
}

impl SpanEdit {
    pub fn new(start: usize, end: usize, replacement: impl Into<String>) -> Self {
        SpanEdit {
            start,
            end,
            replacement: replacement.into(),
        }
    }

    pub fn insert(at: usize, text: impl Into<String>) -> Self {
        SpanEdit::new(at, at, text)
    }

    /// Two edits conflict when their ranges share a byte, or when both are
    /// insertions at the same offset (the result would depend on order).
    pub fn overlaps(&self, other: &SpanEdit) -> bool {
        if self.start == self.end && other.start == other.end {
            return self.start == other.start;
        }
        if self.start == self.end {
            return other.start < self.start && self.start < other.end;
        }
        if other.start == other.end {
            return self.start < other.start && other.start < self.end;
        }
        self.start < other.end && other.start < self.end
    }
}

/// Applies a set of non-overlapping edits to the original text. Bytes outside
/// every edit range are copied unchanged, so an empty edit set reproduces the
/// input exactly.
pub fn emit_source(source: &SourceModule, edits: &[SpanEdit]) -> Result<String> {
    let text = source.text();
    for e in edits {
        if e.start > e.end
            || e.end > text.len()
            || !text.is_char_boundary(e.start)
            || !text.is_char_boundary(e.end)
        {
            return Err(Error::EditOutOfBounds {
                start: e.start,
                end: e.end,
                len: text.len(),
            });
        }
    }
    let mut sorted: Vec<&SpanEdit> = edits.iter().collect();
    sorted.sort_by_key(|e| (e.start, e.end));
    for pair in sorted.windows(2) {
        if pair[0].overlaps(pair[1]) {
            return Err(Error::Overlap {
                first: (pair[0].start, pair[0].end),
                second: (pair[1].start, pair[1].end),
            });
        }
    }
    let mut out = text.to_string();
    for e in sorted.iter().rev() {
        out.replace_range(e.start..e.end, &e.replacement);
    }
    Ok(out)
}

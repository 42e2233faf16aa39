//! Structured per-run report.

use std::fmt::Write;

use serde::Serialize;

use crate::analysis::BreakKind;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TagStatus {
    Fixed,
    Skipped,
    Unfixable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TagReport {
    pub line: usize,
    pub col: usize,
    pub kind: BreakKind,
    pub status: TagStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub function: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FileStatus {
    /// Analyzed (and rewritten if anything was fixable).
    Ok,
    /// No compilation entry point.
    Skipped,
    /// Rewrite failed verification; output equals input.
    Aborted,
    /// Parse or I/O failure.
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PhaseTimings {
    pub parse_us: u64,
    pub build_us: u64,
    pub analyze_us: u64,
    pub plan_us: u64,
    pub apply_us: u64,
    pub heal_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileReport {
    pub path: String,
    pub status: FileStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub entries: usize,
    pub tags: Vec<TagReport>,
    pub edits: usize,
    pub changed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub timings: PhaseTimings,
}

impl FileReport {
    pub fn new(path: impl Into<String>, status: FileStatus) -> Self {
        FileReport {
            path: path.into(),
            status,
            message: None,
            entries: 0,
            tags: Vec::new(),
            edits: 0,
            changed: false,
            notes: Vec::new(),
            timings: PhaseTimings::default(),
        }
    }

    pub fn count(&self, status: TagStatus) -> usize {
        self.tags.iter().filter(|t| t.status == status).count()
    }

    /// Breaks that remain after the rewrite.
    pub fn remaining(&self) -> usize {
        self.tags.len() - self.count(TagStatus::Fixed)
    }

    /// Percentage of breaks fixed, rounded down; 100 when there are none.
    pub fn fixed_percent(&self) -> usize {
        if self.tags.is_empty() {
            100
        } else {
            self.count(TagStatus::Fixed) * 100 / self.tags.len()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Totals {
    pub files: usize,
    pub breaks_found: usize,
    pub fixed: usize,
    pub skipped: usize,
    pub unfixable: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixReport {
    pub version: u32,
    pub files: Vec<FileReport>,
    pub totals: Totals,
}

impl FixReport {
    /// Sorts files by path and sums the totals.
    pub fn new(mut files: Vec<FileReport>) -> Self {
        files.sort_by(|a, b| a.path.cmp(&b.path));
        let mut totals = Totals { files: files.len(), ..Totals::default() };
        for f in &files {
            totals.breaks_found += f.tags.len();
            totals.fixed += f.count(TagStatus::Fixed);
            totals.skipped += f.count(TagStatus::Skipped);
            totals.unfixable += f.count(TagStatus::Unfixable);
            if matches!(f.status, FileStatus::Error | FileStatus::Aborted) {
                totals.errors += 1;
            }
        }
        FixReport { version: REPORT_VERSION, files, totals }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.files {
            let _ = write!(out, "{}: ", f.path);
            match f.status {
                FileStatus::Ok => {
                    let _ = writeln!(
                        out,
                        "{} break(s), {} fixed, {} entr{}",
                        f.tags.len(),
                        f.count(TagStatus::Fixed),
                        f.entries,
                        if f.entries == 1 { "y" } else { "ies" }
                    );
                }
                FileStatus::Skipped => {
                    let _ = writeln!(out, "skipped: {}", f.message.as_deref().unwrap_or(""));
                }
                FileStatus::Aborted | FileStatus::Error => {
                    let status = if f.status == FileStatus::Aborted { "aborted" } else { "error" };
                    let _ = writeln!(out, "{status}: {}", f.message.as_deref().unwrap_or(""));
                }
            }
            for t in &f.tags {
                let status = match t.status {
                    TagStatus::Fixed => "fixed",
                    TagStatus::Skipped => "skipped",
                    TagStatus::Unfixable => "unfixable",
                };
                let _ = write!(out, "  {}:{}:{} {:?} {status}", f.path, t.line, t.col, t.kind);
                if let Some(r) = &t.reason {
                    let _ = write!(out, " ({r})");
                }
                let _ = writeln!(out, " in {}", t.function);
            }
            for n in &f.notes {
                let _ = writeln!(out, "  note: {n}");
            }
        }
        let t = &self.totals;
        let _ = writeln!(
            out,
            "{} file(s): {} break(s) found, {} fixed, {} skipped, {} unfixable, {} error(s)",
            t.files, t.breaks_found, t.fixed, t.skipped, t.unfixable, t.errors
        );
        out
    }
}

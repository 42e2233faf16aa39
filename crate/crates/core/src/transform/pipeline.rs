//! parse -> build -> entries -> detect -> plan -> apply -> heal -> emit.

use std::time::Instant;

use super::plan::{apply_plan, plan_fixes, FixOptions, TagOutcome};
use super::report::{FileReport, FileStatus, TagReport, TagStatus};
use crate::analysis::analyze;
use crate::error::Error;
use crate::frontend::{emit_source, parse_module, SourceModule};
use crate::uniir::UniIr;

#[derive(Debug, Clone)]
pub struct FixOutcome {
    /// Rewritten text; equal to the input when nothing was fixed or on abort.
    pub new_text: String,
    pub report: FileReport,
}

impl FixOutcome {
    pub fn changed(&self) -> bool {
        self.report.changed
    }
}

fn micros(since: Instant) -> u64 {
    since.elapsed().as_micros() as u64
}

pub fn fix_file(source: &SourceModule, options: &FixOptions) -> FixOutcome {
    let path = source.path().display().to_string();
    let original = source.text().to_string();
    let mut report = FileReport::new(path, FileStatus::Ok);
    let fail = |mut report: FileReport, status, err: Error| {
        report.status = status;
        report.message = Some(err.to_string());
        FixOutcome { new_text: original.clone(), report }
    };

    let t = Instant::now();
    let ast = match parse_module(source) {
        Ok(ast) => ast,
        Err(e) => return fail(report, FileStatus::Error, e),
    };
    report.timings.parse_us = micros(t);

    let t = Instant::now();
    let ir = UniIr::from_ast(source.clone(), ast);
    if let Err(e) = ir.verify() {
        return fail(report, FileStatus::Aborted, e);
    }
    report.timings.build_us = micros(t);

    let t = Instant::now();
    let analysis = analyze(&ir, &options.analysis);
    report.timings.analyze_us = micros(t);
    report.entries = analysis.entries.len();
    report.notes = analysis.notes.clone();
    if analysis.entries.is_empty() {
        report.status = FileStatus::Skipped;
        report.message = Some("no torch.compile".to_string());
        return FixOutcome { new_text: original, report };
    }

    let t = Instant::now();
    let plan = plan_fixes(&ir, &analysis, options);
    report.timings.plan_us = micros(t);
    report.tags = analysis
        .tags
        .iter()
        .zip(&plan.outcomes)
        .map(|(tag, outcome)| {
            let span = ir.ast.span(tag.site);
            let (status, reason) = match outcome {
                TagOutcome::Fixed => (TagStatus::Fixed, None),
                TagOutcome::Skipped(r) => (TagStatus::Skipped, Some(r.clone())),
                TagOutcome::Unfixable(r) => (TagStatus::Unfixable, Some(r.clone())),
            };
            TagReport {
                line: span.line,
                col: span.col,
                kind: tag.kind,
                status,
                reason,
                function: ir.ast.def_name(tag.function).unwrap_or("?").to_string(),
            }
        })
        .collect();
    if plan.rewrites.is_empty() {
        return FixOutcome { new_text: original, report };
    }

    let t = Instant::now();
    let emitted = apply_plan(&ir, &plan).and_then(|edits| {
        let text = emit_source(source, &edits)?;
        Ok((edits.len(), text))
    });
    report.timings.apply_us = micros(t);
    let (edits, new_text) = match emitted {
        Ok(x) => x,
        Err(e) => return abort(report, original, e),
    };

    let t = Instant::now();
    let mut healed = ir;
    if let Err(e) = healed.replace_source(new_text.clone()) {
        return abort(report, original, e);
    }
    report.timings.heal_us = micros(t);
    report.edits = edits;
    report.changed = new_text != original;
    FixOutcome { new_text, report }
}

/// Keep the input; planned fixes did not happen.
fn abort(mut report: FileReport, original: String, err: Error) -> FixOutcome {
    report.status = FileStatus::Aborted;
    report.message = Some(err.to_string());
    for t in &mut report.tags {
        if t.status == TagStatus::Fixed {
            t.status = TagStatus::Skipped;
            t.reason = Some("aborted".to_string());
        }
    }
    FixOutcome { new_text: original, report }
}

//! Rewrites: predicated control flow and deferred side effects.

mod names;
mod pipeline;
mod plan;
mod predicate;
mod report;

pub use names::FreshNames;
pub use pipeline::{fix_file, FixOutcome};
pub use plan::{
    apply_plan, plan_fixes, DeferralRewrite, FixOptions, PredicationRewrite, Rewrite, TagOutcome, TransformPlan,
};
pub use report::{FileReport, FileStatus, FixReport, PhaseTimings, TagReport, TagStatus, Totals, REPORT_VERSION};

//! Entry-point discovery, taint, and graph-break detection.

mod config;
mod detect;
mod entry;
pub(crate) mod resolve;
mod taint;

pub use config::{Dynamism, NameList, TorchAttrTable};
pub use detect::{
    analyze, detect_breaks, in_epilogue, is_logger_call, Analysis, AnalysisConfig, BreakKind, FunctionAnalysis,
    GraphBreakTag, Reach,
};
pub use entry::{find_entry_points, EntryMechanism, EntryPoint};
pub use taint::{compute_taint, compute_taint_with_seeds, parameter_symbols, TaintSet, TaintState};

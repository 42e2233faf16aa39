//! Source-level detection and repair of `torch.compile` graph breaks.
//!
//! The pipeline parses Python model code into a span-annotated syntax tree,
//! layers a symbol table and per-function control-flow graphs on top of it
//! ([`uniir::UniIr`]), locates compilation entry points, tags constructs that
//! force the tracer to split the graph, and rewrites the fixable ones:
//! tensor-dependent `if` statements become `torch.where` selects, and
//! `print`/`logger` calls are deferred to the function epilogue.
//!
//! Untouched source is never reformatted: every rewrite is a byte-range
//! splice over the original text.

pub mod analysis;
pub mod error;
pub mod frontend;
pub mod transform;
pub mod uniir;


pub use error::{Error, Result};
pub use analysis::{AnalysisConfig, BreakKind, GraphBreakTag, TorchAttrTable};
pub use frontend::{parse_module, Ast, NodeId, NodeKind, SourceModule};
pub use transform::{fix_file, FileReport, FixOptions, FixOutcome, FixReport, TagStatus};
pub use uniir::UniIr;



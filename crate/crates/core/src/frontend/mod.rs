//! Lossless parsing and span-based re-emission.

mod ast;
mod diff;
mod edit;
mod lexer;
mod parser;
mod source;

pub use ast::{
    Ast, BinOpKind, BoolOpKind, CmpOp, ExprContext, LitKind, Node, NodeId, NodeKind, ParamKind,
    Span, UnaryOpKind,
};
pub use diff::unified_diff;
pub use edit::{emit_source, SpanEdit};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse_module;
pub use source::SourceModule;

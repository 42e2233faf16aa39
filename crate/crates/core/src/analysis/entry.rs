//! Compilation entry points: functions the JIT will try to capture.

use serde::Serialize;

use super::resolve::{is_torch_compile, method_of, single_def};
use crate::frontend::{NodeId, NodeKind};
use crate::uniir::UniIr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryMechanism {
    Decorator,
    CallWrap,
    ModuleCompile,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryPoint {
    pub function: NodeId,
    pub mechanism: EntryMechanism,
    /// Source of the `torch.compile` argument list, without parentheses.
    pub compile_args: String,
}

pub fn find_entry_points(ir: &UniIr) -> Vec<EntryPoint> {
    let ast = &ir.ast;
    let mut out: Vec<EntryPoint> = Vec::new();
    let mut push = |e: EntryPoint| {
        if !out.iter().any(|o| o.function == e.function) {
            out.push(e);
        }
    };

    for def in ast.functions() {
        for dec in ast.decorators(def) {
            let expr = ast.child(dec, 0);
            let (callee, args) = match ast.kind(expr) {
                NodeKind::Call => (ast.callee(expr), args_text(ir, expr)),
                _ => (expr, String::new()),
            };
            if is_torch_compile(ir, callee) {
                push(EntryPoint { function: def, mechanism: EntryMechanism::Decorator, compile_args: args });
            }
        }
    }

    for call in ast.descendants(ast.root()) {
        if !matches!(ast.kind(call), NodeKind::Call) || !is_torch_compile(ir, ast.callee(call)) {
            continue;
        }
        // A decorator's call is handled above.
        if ast.parent(call).is_some_and(|p| matches!(ast.kind(p), NodeKind::Decorator)) {
            continue;
        }
        let Some(&target) = ast.call_args(call).first() else { continue };
        if matches!(ast.kind(target), NodeKind::Keyword { .. }) {
            continue;
        }
        let compile_args = args_text(ir, call);
        if let Some(def) = resolve_function(ir, target) {
            push(EntryPoint { function: def, mechanism: EntryMechanism::CallWrap, compile_args });
        } else if let Some(class) = resolve_instance_class(ir, target) {
            if let Some(forward) = method_of(ir, class, "forward") {
                push(EntryPoint { function: forward, mechanism: EntryMechanism::ModuleCompile, compile_args });
            }
        }
    }
    out.sort_by_key(|e| ast.span(e.function).start);
    out
}

fn args_text(ir: &UniIr, call: NodeId) -> String {
    let args = ir.ast.call_args(call);
    match (args.first(), args.last()) {
        (Some(&a), Some(&b)) => ir.text()[ir.ast.span(a).start..ir.ast.span(b).end].to_string(),
        _ => String::new(),
    }
}

/// `f` naming a same-file function definition.
fn resolve_function(ir: &UniIr, expr: NodeId) -> Option<NodeId> {
    if !matches!(ir.ast.kind(expr), NodeKind::Name { .. }) {
        return None;
    }
    let def = single_def(ir, expr)?;
    matches!(ir.ast.kind(def), NodeKind::FunctionDef { .. }).then_some(def)
}

/// Class of `Model(...)` or of a name bound once to `Model(...)`.
fn resolve_instance_class(ir: &UniIr, expr: NodeId) -> Option<NodeId> {
    let ast = &ir.ast;
    let ctor = match ast.kind(expr) {
        NodeKind::Call => expr,
        NodeKind::Name { .. } => {
            let def = single_def(ir, expr)?;
            let assign = ast.parent(def)?;
            if !matches!(ast.kind(assign), NodeKind::Assign) {
                return None;
            }
            let value = *ast.children(assign).last()?;
            if !matches!(ast.kind(value), NodeKind::Call) {
                return None;
            }
            value
        }
        _ => return None,
    };
    let callee = ast.callee(ctor);
    if !matches!(ast.kind(callee), NodeKind::Name { .. }) {
        return None;
    }
    let class = single_def(ir, callee)?;
    matches!(ast.kind(class), NodeKind::ClassDef { .. }).then_some(class)
}

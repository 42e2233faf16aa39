//! Name-resolution queries shared by the analysis passes.

use crate::frontend::{NodeId, NodeKind};
use crate::uniir::{Symbol, SymbolOrigin, UniIr};

pub(crate) fn symbol<'a>(ir: &'a UniIr, name: NodeId) -> Option<&'a Symbol> {
    ir.symbols.symbol_of(name).map(|s| ir.symbols.symbol(s))
}

/// `name` refers to the torch package (or one of its submodules).
pub(crate) fn is_torch_module(ir: &UniIr, name: NodeId) -> bool {
    let Some(sym) = symbol(ir, name) else { return false };
    match &sym.origin {
        SymbolOrigin::Import { module } => module == "torch" || module.starts_with("torch."),
        SymbolOrigin::External => sym.name == "torch",
        _ => false,
    }
}

/// Attribute/call chain whose leftmost name is the torch package.
pub(crate) fn is_torch_rooted(ir: &UniIr, expr: NodeId) -> bool {
    if matches!(ir.ast.kind(expr), NodeKind::Name { .. }) {
        return false;
    }
    ir.ast.chain_root(expr).is_some_and(|r| is_torch_module(ir, r))
}

/// `torch.compile` under whatever name torch is bound to.
pub(crate) fn is_torch_compile(ir: &UniIr, expr: NodeId) -> bool {
    let ast = &ir.ast;
    match ast.kind(expr) {
        NodeKind::Attribute { attr, .. } if attr == "compile" => {
            let base = ast.child(expr, 0);
            matches!(ast.kind(base), NodeKind::Name { .. }) && is_torch_module(ir, base)
        }
        NodeKind::Name { .. } => symbol(ir, expr).is_some_and(|s| {
            matches!(&s.origin, SymbolOrigin::Import { module } if module == "torch.compile")
        }),
        _ => false,
    }
}


/// The definition node a name resolves to, when it has exactly one def.
pub(crate) fn single_def(ir: &UniIr, name: NodeId) -> Option<NodeId> {
    let sym = symbol(ir, name)?;
    match sym.defs.as_slice() {
        [d] => Some(*d),
        _ => None,
    }
}

/// A method named `name` defined directly in class `class`.
pub(crate) fn method_of(ir: &UniIr, class: NodeId, name: &str) -> Option<NodeId> {
    let body = ir.ast.body(class)?;
    ir.ast
        .statements(body)
        .iter()
        .copied()
        .find(|&s| matches!(ir.ast.kind(s), NodeKind::FunctionDef { name: n, .. } if n == name))
}

/// Class that defines method `def`, if `def` is a method.
pub(crate) fn owning_class(ir: &UniIr, def: NodeId) -> Option<NodeId> {
    let block = ir.ast.parent(def)?;
    let class = ir.ast.parent(block)?;
    matches!(ir.ast.kind(class), NodeKind::ClassDef { .. }).then_some(class)
}

//! Text rendering of the IR for `--dump-ir`.

use std::fmt::Write;

use super::{CfgNode, UniIr};

fn label(ir: &UniIr, node: CfgNode) -> String {
    match node {
        CfgNode::Entry => "ENTRY".to_string(),
        CfgNode::Exit => "EXIT".to_string(),
        CfgNode::Stmt(s) => {
            let span = ir.ast.span(s);
            format!("{}@{}:{}", ir.ast.kind(s).label(), span.line, span.col)
        }
    }
}

pub fn dump_ir(ir: &UniIr) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", ir.source.path().display());
    let _ = writeln!(out, "symbols:");
    for scope in ir.symbols.scopes() {
        let owner = ir.ast.def_name(scope.owner).unwrap_or("<module>");
        let names: Vec<&str> = scope.symbols.keys().map(String::as_str).collect();
        let _ = writeln!(out, "  {:?} {}: {}", scope.kind, owner, names.join(", "));
    }
    for (&def, f) in &ir.cfg.functions {
        let span = ir.ast.span(def);
        let name = ir.ast.def_name(def).unwrap_or("?");
        let _ = writeln!(out, "cfg {name}@{}:{} ({} nodes)", span.line, span.col, f.len());
        for (i, &node) in f.nodes().iter().enumerate() {
            let _ = writeln!(out, "  {i}: {}", label(ir, node));
        }
        for e in f.edges() {
            let _ = writeln!(out, "  {} -> {} [{}]", e.from, e.to, e.kind.label());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::SourceModule;

    #[test]
    fn dump_lists_labels_and_edges() {
        let src = "def f(x):\n    if x:\n        return 1\n    return 2\n";
        let ir = UniIr::build(SourceModule::new("m.py", src)).unwrap();
        let text = dump_ir(&ir);
        assert!(text.contains("cfg f@1:1 (5 nodes)"), "{text}");
        assert!(text.contains("if@2:5"));
        assert!(text.contains("[true-branch]"));
        assert!(text.contains("-> 1 [return]"));
    }
}

//! Unified IR: syntax tree, symbol table and per-function CFGs kept in sync.
//!
//! Rewrites never touch the tree directly. They are applied to the source
//! text, after which [`UniIr::replace_source`] reparses and heals the derived
//! structures. [`UniIr::verify`] checks that everything still agrees.

mod cfg;
mod dom;
mod dump;
mod symtab;

pub use cfg::{build_cfg, build_function_cfg, function_statements, Cfg, CfgEdge, CfgNode, EdgeKind, FunctionCfg};
pub use dom::{dominates, Dominators};
pub use dump::dump_ir;
pub use symtab::{
    build_symbol_table, Scope, ScopeId, ScopeKind, Symbol, SymbolId, SymbolOrigin, SymbolTable,
};

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::frontend::{parse_module, Ast, NodeId, SourceModule};

#[derive(Debug, Clone)]
pub struct UniIr {
    pub source: SourceModule,
    pub ast: Ast,
    pub symbols: SymbolTable,
    pub cfg: Cfg,
}

impl UniIr {
    pub fn build(source: SourceModule) -> Result<Self> {
        let ast = parse_module(&source)?;
        Ok(Self::from_ast(source, ast))
    }

    pub fn from_ast(source: SourceModule, ast: Ast) -> Self {
        let symbols = build_symbol_table(&ast);
        let cfg = build_cfg(&ast);
        UniIr { source, ast, symbols, cfg }
    }

    pub fn text(&self) -> &str {
        self.source.text()
    }

    /// Swap in rewritten text, reparse, and heal.
    pub fn replace_source(&mut self, text: impl Into<String>) -> Result<()> {
        let source = self.source.with_text(text);
        let ast = parse_module(&source)?;
        self.source = source;
        self.ast = ast;
        self.heal()
    }

    /// Recompute the symbol table and CFGs from the current tree, then verify.
    pub fn heal(&mut self) -> Result<()> {
        self.verify_tree()?;
        self.symbols = build_symbol_table(&self.ast);
        self.cfg = build_cfg(&self.ast);
        self.verify()
    }

    pub fn is_consistent(&self) -> bool {
        self.verify().is_ok()
    }

    pub fn dominators(&self, def: NodeId) -> Option<Dominators> {
        self.cfg.function(def).map(Dominators::compute)
    }

    pub fn verify(&self) -> Result<()> {
        let mut violations = self.tree_violations();
        if violations.is_empty() {
            violations.extend(self.cfg_violations());
            violations.extend(self.symbol_violations());
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Verification { violations })
        }
    }

    fn verify_tree(&self) -> Result<()> {
        let violations = self.tree_violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Verification { violations })
        }
    }

    fn tree_violations(&self) -> Vec<String> {
        let ast = &self.ast;
        let text = self.source.text();
        let mut out = Vec::new();
        let n = ast.len();
        let in_range = |id: NodeId| id.index() < n;
        for (i, node) in ast.nodes().iter().enumerate() {
            if node.id.index() != i {
                out.push(format!("node {i} carries id {}", node.id));
            }
            let span = node.span;
            if span.start > span.end || span.end > text.len() {
                out.push(format!("{} span {}..{} out of bounds", node.id, span.start, span.end));
                continue;
            }
            if !text.is_char_boundary(span.start) || !text.is_char_boundary(span.end) {
                out.push(format!("{} span {}..{} splits a character", node.id, span.start, span.end));
            }
            let mut prev_end = span.start;
            for &c in &node.children {
                if !in_range(c) {
                    out.push(format!("{} has dangling child {c}", node.id));
                    continue;
                }
                let child = ast.node(c);
                if child.parent != Some(node.id) {
                    out.push(format!("{c} is a child of {} but its parent is {:?}", node.id, child.parent));
                }
                if !span.contains(&child.span) {
                    out.push(format!("{c} span escapes parent {}", node.id));
                }
                if child.span.start < prev_end {
                    out.push(format!("{c} overlaps or precedes its previous sibling"));
                }
                prev_end = prev_end.max(child.span.end);
            }
            match node.parent {
                None if node.id != ast.root() => out.push(format!("{} has no parent", node.id)),
                Some(p) if !in_range(p) => out.push(format!("{} has dangling parent {p}", node.id)),
                Some(p) if !ast.children(p).contains(&node.id) => {
                    out.push(format!("{} names parent {p} which does not list it", node.id))
                }
                _ => {}
            }
        }
        if in_range(ast.root()) {
            let root = ast.span(ast.root());
            if root.start != 0 || root.end != text.len() {
                out.push("module span does not cover the file".to_string());
            }
        } else {
            out.push("root id out of range".to_string());
        }
        out
    }

    fn cfg_violations(&self) -> Vec<String> {
        let ast = &self.ast;
        let mut out = Vec::new();
        let defs: HashSet<NodeId> = ast.functions().into_iter().collect();
        if defs.len() != self.cfg.functions.len() || !self.cfg.functions.keys().all(|d| defs.contains(d)) {
            out.push("CFG set does not match function definitions".to_string());
        }
        for (&def, f) in &self.cfg.functions {
            let stmts = function_statements(ast, def);
            let dead: HashSet<NodeId> = f
                .unreachable
                .iter()
                .flat_map(|&u| {
                    let mut v = vec![u];
                    v.extend(ast.descendants_in_scope(u));
                    v
                })
                .collect();
            let live = stmts.iter().filter(|s| !dead.contains(s)).count();
            if f.len() != live + 2 {
                out.push(format!("CFG of {def} has {} nodes, expected {}", f.len(), live + 2));
            }
            if f.node(FunctionCfg::ENTRY) != CfgNode::Entry || f.node(FunctionCfg::EXIT) != CfgNode::Exit {
                out.push(format!("CFG of {def} lacks ENTRY/EXIT"));
            }
            if !f.predecessors(FunctionCfg::ENTRY).is_empty() {
                out.push(format!("CFG of {def}: ENTRY has predecessors"));
            }
            if !f.successors(FunctionCfg::EXIT).is_empty() {
                out.push(format!("CFG of {def}: EXIT has successors"));
            }
            for e in f.edges() {
                if e.from >= f.len() || e.to >= f.len() {
                    out.push(format!("CFG of {def}: edge {} -> {} out of range", e.from, e.to));
                }
            }
            for node in f.nodes() {
                if let CfgNode::Stmt(s) = node {
                    if ast.get(*s).is_none() || ast.enclosing_function(*s) != Some(def) {
                        out.push(format!("CFG of {def} holds foreign statement {s}"));
                    }
                }
            }
        }
        out
    }

    fn symbol_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for sym in self.symbols.symbols() {
            for &n in sym.defs.iter().chain(&sym.uses) {
                if self.ast.get(n).is_none() {
                    out.push(format!("symbol {} refers to missing node {n}", sym.name));
                }
            }
        }
        out
    }
}

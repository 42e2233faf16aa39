//! Forward taint dataflow: which variables may hold tensor-derived values.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::config::TorchAttrTable;
use super::resolve::{is_torch_rooted, owning_class, symbol};
use crate::frontend::{CmpOp, NodeId, NodeKind, ParamKind};
use crate::uniir::{CfgNode, FunctionCfg, SymbolId, SymbolOrigin, UniIr};

/// Builtins whose results never carry tensor values.
const HOST_BUILTINS: [&str; 5] = ["isinstance", "len", "hasattr", "callable", "type"];

pub type TaintSet = BTreeSet<SymbolId>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaintState {
    pub function: NodeId,
    pub seeds: TaintSet,
    /// Tainted symbols on entry to each reachable statement.
    before: HashMap<NodeId, TaintSet>,
    at_exit: TaintSet,
}

static EMPTY: TaintSet = BTreeSet::new();

impl TaintState {
    pub fn before(&self, stmt: NodeId) -> &TaintSet {
        self.before.get(&stmt).unwrap_or(&EMPTY)
    }

    pub fn at_exit(&self) -> &TaintSet {
        &self.at_exit
    }

    /// Every symbol tainted at some program point.
    pub fn tainted_anywhere(&self) -> TaintSet {
        let mut all = self.seeds.clone();
        for set in self.before.values() {
            all.extend(set.iter().copied());
        }
        all.extend(self.at_exit.iter().copied());
        all
    }

    /// Is `expr` tensor-valued at the point its statement starts executing?
    pub fn expr_tainted(&self, ir: &UniIr, table: &TorchAttrTable, expr: NodeId) -> bool {
        let stmt = ir.ast.enclosing_statement(expr).unwrap_or(expr);
        expr_tainted(ir, table, self.before(stmt), expr)
    }

    /// Tainted names loaded inside `expr`, in source order.
    pub fn tainted_names(&self, ir: &UniIr, expr: NodeId) -> Vec<NodeId> {
        let stmt = ir.ast.enclosing_statement(expr).unwrap_or(expr);
        let set = self.before(stmt);
        ir.ast
            .descendants(expr)
            .into_iter()
            .filter(|&n| {
                matches!(ir.ast.kind(n), NodeKind::Name { .. })
                    && ir.symbols.symbol_of(n).is_some_and(|s| set.contains(&s))
            })
            .collect()
    }
}

/// Parameters of `def`, minus a leading `self`/`cls` on methods.
pub fn parameter_symbols(ir: &UniIr, def: NodeId) -> Vec<SymbolId> {
    let ast = &ir.ast;
    let mut params: Vec<NodeId> = ast
        .params(def)
        .into_iter()
        .filter(|&p| !matches!(ast.kind(p), NodeKind::Param { kind: ParamKind::Marker, .. }))
        .collect();
    if owning_class(ir, def).is_some() && !params.is_empty() {
        params.remove(0);
    }
    params.into_iter().filter_map(|p| ir.symbols.symbol_of(p)).collect()
}

pub fn compute_taint(ir: &UniIr, table: &TorchAttrTable, def: NodeId) -> TaintState {
    let seeds = parameter_symbols(ir, def).into_iter().collect();
    compute_taint_with_seeds(ir, table, def, seeds)
}

pub fn compute_taint_with_seeds(ir: &UniIr, table: &TorchAttrTable, def: NodeId, seeds: TaintSet) -> TaintState {
    let cfg = ir.cfg.function(def).expect("function has a CFG");
    let n = cfg.len();
    let mut ins: Vec<TaintSet> = vec![TaintSet::new(); n];
    let mut outs: Vec<Option<TaintSet>> = vec![None; n];
    outs[FunctionCfg::ENTRY] = Some(seeds.clone());
    let mut queue: VecDeque<usize> = cfg.successors(FunctionCfg::ENTRY).iter().copied().collect();
    while let Some(i) = queue.pop_front() {
        let mut input = TaintSet::new();
        for &p in cfg.predecessors(i) {
            if let Some(out) = &outs[p] {
                input.extend(out.iter().copied());
            }
        }
        ins[i] = input.clone();
        let out = match cfg.node(i) {
            CfgNode::Stmt(s) => transfer(ir, table, s, input),
            _ => input,
        };
        if outs[i].as_ref() != Some(&out) {
            outs[i] = Some(out);
            for &s in cfg.successors(i) {
                if !queue.contains(&s) {
                    queue.push_back(s);
                }
            }
        }
    }
    let mut before = HashMap::new();
    for (i, set) in ins.iter().enumerate() {
        if let CfgNode::Stmt(s) = cfg.node(i) {
            before.insert(s, set.clone());
        }
    }
    TaintState { function: def, seeds, before, at_exit: ins[FunctionCfg::EXIT].clone() }
}

fn transfer(ir: &UniIr, table: &TorchAttrTable, stmt: NodeId, mut set: TaintSet) -> TaintSet {
    let ast = &ir.ast;
    // Walrus bindings inside the statement header.
    for e in ast.statement_exprs(stmt) {
        for n in ast.descendants_in_scope(e) {
            if matches!(ast.kind(n), NodeKind::NamedExpr) {
                let t = expr_tainted(ir, table, &set, ast.child(n, 1));
                bind(ir, ast.child(n, 0), t, &mut set);
            }
        }
    }
    let children = ast.children(stmt);
    match ast.kind(stmt) {
        NodeKind::Assign => {
            let (value, targets) = children.split_last().unwrap();
            let t = expr_tainted(ir, table, &set, *value);
            for &target in targets {
                bind(ir, target, t, &mut set);
            }
        }
        NodeKind::AnnAssign if children.len() == 3 => {
            let t = expr_tainted(ir, table, &set, children[2]);
            bind(ir, children[0], t, &mut set);
        }
        NodeKind::AugAssign { .. } => {
            let t = expr_tainted(ir, table, &set, children[1]) || expr_tainted(ir, table, &set, children[0]);
            bind(ir, children[0], t, &mut set);
        }
        NodeKind::For { .. } => {
            let t = expr_tainted(ir, table, &set, children[1]);
            bind(ir, children[0], t, &mut set);
        }
        NodeKind::With { .. } => {
            for &item in &children[..children.len() - 1] {
                let parts = ast.children(item);
                if parts.len() == 2 {
                    let t = expr_tainted(ir, table, &set, parts[0]);
                    bind(ir, parts[1], t, &mut set);
                }
            }
        }
        NodeKind::FunctionDef { .. } | NodeKind::ClassDef { .. } => {
            if let Some(sym) = ir.symbols.symbol_of(stmt) {
                set.remove(&sym);
            }
        }
        _ => {}
    }
    set
}

/// Strong update for plain names; weak (gen-only) for subscript stores.
fn bind(ir: &UniIr, target: NodeId, tainted: bool, set: &mut TaintSet) {
    let ast = &ir.ast;
    match ast.kind(target) {
        NodeKind::Name { .. } => {
            if let Some(sym) = ir.symbols.symbol_of(target) {
                if tainted {
                    set.insert(sym);
                } else {
                    set.remove(&sym);
                }
            }
        }
        NodeKind::Tuple { .. } | NodeKind::List { .. } => {
            for &c in ast.children(target) {
                bind(ir, c, tainted, set);
            }
        }
        NodeKind::Starred { .. } => bind(ir, ast.child(target, 0), tainted, set),
        NodeKind::Subscript { .. } if tainted => {
            let base = ast.child(target, 0);
            if matches!(ast.kind(base), NodeKind::Name { .. }) {
                if let Some(sym) = ir.symbols.symbol_of(base) {
                    set.insert(sym);
                }
            }
        }
        _ => {}
    }
}

pub(crate) fn expr_tainted(ir: &UniIr, table: &TorchAttrTable, set: &TaintSet, expr: NodeId) -> bool {
    let ast = &ir.ast;
    let any_child = || ast.children(expr).iter().any(|&c| expr_tainted(ir, table, set, c));
    match ast.kind(expr) {
        NodeKind::Name { .. } => ir.symbols.symbol_of(expr).is_some_and(|s| set.contains(&s)),
        NodeKind::Literal { .. } | NodeKind::Lambda => false,
        NodeKind::Attribute { attr, .. } => !table.is_static(attr) && expr_tainted(ir, table, set, ast.child(expr, 0)),
        NodeKind::Call => {
            let callee = ast.callee(expr);
            match ast.kind(callee) {
                NodeKind::Attribute { attr, .. } if table.is_static(attr) => return false,
                NodeKind::Name { id, .. } if HOST_BUILTINS.contains(&id.as_str()) => {
                    if symbol(ir, callee).is_some_and(|s| s.origin == SymbolOrigin::External) {
                        return false;
                    }
                }
                _ => {}
            }
            is_torch_rooted(ir, callee) || any_child()
        }
        NodeKind::Compare { ops } if ops.iter().all(|op| matches!(op, CmpOp::Is | CmpOp::IsNot)) => false,
        _ => any_child(),
    }
}

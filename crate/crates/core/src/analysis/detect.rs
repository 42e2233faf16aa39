//! Graph-break detection over each entry point's reachable statements.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use super::config::{NameList, TorchAttrTable};
use super::entry::{find_entry_points, EntryPoint};
use super::resolve::{is_torch_module, is_torch_rooted, method_of, owning_class, single_def, symbol};
use super::taint::{compute_taint_with_seeds, expr_tainted, parameter_symbols, TaintSet, TaintState};
use crate::frontend::{NodeId, NodeKind};
use crate::uniir::{CfgNode, FunctionCfg, SymbolOrigin, UniIr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BreakKind {
    DynCtrlFl,
    LoggerPrint,
    ItemAccess,
    DynamicShapeOp,
    UnsupportedOther,
}

impl BreakKind {
    pub fn may_be_fixable(self) -> bool {
        matches!(self, BreakKind::DynCtrlFl | BreakKind::LoggerPrint)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphBreakTag {
    /// The `if`/loop statement, or the offending call.
    pub site: NodeId,
    pub function: NodeId,
    pub kind: BreakKind,
    pub fixable: bool,
    /// Why the tag can never be fixed (only when `fixable` is false).
    pub reason: Option<String>,
    pub evidence: Vec<(NodeId, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub attr_table: TorchAttrTable,
    pub dynamic_shape_ops: NameList,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { attr_table: TorchAttrTable::default(), dynamic_shape_ops: NameList::default_dynamic_shape_ops() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reach {
    Entry,
    /// Directly called from an entry in the same file.
    Callee { caller: NodeId },
}

#[derive(Debug, Clone)]
pub struct FunctionAnalysis {
    pub function: NodeId,
    pub reach: Reach,
    pub taint: TaintState,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub entries: Vec<EntryPoint>,
    pub functions: Vec<FunctionAnalysis>,
    /// In source order.
    pub tags: Vec<GraphBreakTag>,
    pub notes: Vec<String>,
}

impl Analysis {
    pub fn taint_of(&self, def: NodeId) -> Option<&TaintState> {
        self.functions.iter().find(|f| f.function == def).map(|f| &f.taint)
    }
}

pub fn analyze(ir: &UniIr, config: &AnalysisConfig) -> Analysis {
    let entries = find_entry_points(ir);
    let mut functions = Vec::new();
    let mut tags = Vec::new();
    let mut notes = Vec::new();
    let mut done: HashSet<NodeId> = HashSet::new();
    let mut callees: BTreeMap<NodeId, (NodeId, TaintSet)> = BTreeMap::new();

    for e in &entries {
        if !done.insert(e.function) {
            continue;
        }
        let seeds = parameter_symbols(ir, e.function).into_iter().collect();
        let taint = compute_taint_with_seeds(ir, &config.attr_table, e.function, seeds);
        let mut d = Detector { ir, config, taint: &taint, tags: &mut tags, calls: Vec::new() };
        d.run();
        for (call, def) in d.calls {
            let seeds = argument_seeds(ir, &config.attr_table, &taint, call, def);
            callees.entry(def).or_insert_with(|| (e.function, TaintSet::new())).1.extend(seeds);
        }
        functions.push(FunctionAnalysis { function: e.function, reach: Reach::Entry, taint });
    }
    for (def, (caller, seeds)) in callees {
        if !done.insert(def) {
            continue;
        }
        let taint = compute_taint_with_seeds(ir, &config.attr_table, def, seeds);
        let mut d = Detector { ir, config, taint: &taint, tags: &mut tags, calls: Vec::new() };
        d.run();
        for (call, callee) in d.calls {
            if !done.contains(&callee) {
                let span = ir.ast.span(call);
                notes.push(format!(
                    "{}:{}: call into `{}` not followed (more than one level from an entry)",
                    span.line,
                    span.col,
                    ir.ast.def_name(callee).unwrap_or("?")
                ));
            }
        }
        functions.push(FunctionAnalysis { function: def, reach: Reach::Callee { caller }, taint });
    }
    for f in &functions {
        let cfg = ir.cfg.function(f.function).unwrap();
        for &u in &cfg.unreachable {
            let span = ir.ast.span(u);
            notes.push(format!("{}:{}: unreachable statement ignored", span.line, span.col));
        }
    }
    tags.sort_by_key(|t| (ir.ast.span(t.site).start, t.kind));
    tags.dedup_by_key(|t| (t.site, t.kind));
    notes.sort();
    notes.dedup();
    Analysis { entries, functions, tags, notes }
}

/// Just the tags, for callers that already know the entries.
pub fn detect_breaks(ir: &UniIr, config: &AnalysisConfig) -> Vec<GraphBreakTag> {
    analyze(ir, config).tags
}

/// Callee parameters that receive tainted arguments.
fn argument_seeds(ir: &UniIr, table: &TorchAttrTable, taint: &TaintState, call: NodeId, def: NodeId) -> TaintSet {
    let ast = &ir.ast;
    let params = parameter_symbols(ir, def);
    let set = taint.before(ast.enclosing_statement(call).unwrap());
    let mut seeds = TaintSet::new();
    let mut pos = 0;
    for &arg in ast.call_args(call) {
        match ast.kind(arg) {
            NodeKind::Keyword { arg: Some(name) } => {
                if expr_tainted(ir, table, set, ast.child(arg, 0)) {
                    seeds.extend(params.iter().copied().filter(|&p| ir.symbols.symbol(p).name == *name));
                }
            }
            NodeKind::Keyword { arg: None } | NodeKind::Starred { .. } => {
                if expr_tainted(ir, table, set, ast.child(arg, 0)) {
                    seeds.extend(params.iter().skip(pos).copied());
                }
            }
            _ => {
                if expr_tainted(ir, table, set, arg) {
                    if let Some(&p) = params.get(pos) {
                        seeds.insert(p);
                    }
                }
                pos += 1;
            }
        }
    }
    seeds
}

struct Detector<'a> {
    ir: &'a UniIr,
    config: &'a AnalysisConfig,
    taint: &'a TaintState,
    tags: &'a mut Vec<GraphBreakTag>,
    /// Same-file calls seen, with their resolved definitions.
    calls: Vec<(NodeId, NodeId)>,
}

impl<'a> Detector<'a> {
    fn run(&mut self) {
        let cfg = self.ir.cfg.function(self.taint.function).unwrap();
        let mut seen = vec![false; cfg.len()];
        seen[FunctionCfg::ENTRY] = true;
        let mut worklist: VecDeque<usize> = VecDeque::new();
        for &s in cfg.successors(FunctionCfg::ENTRY) {
            seen[s] = true;
            worklist.push_back(s);
        }
        while let Some(n) = worklist.pop_front() {
            if let CfgNode::Stmt(stmt) = cfg.node(n) {
                self.visit(stmt);
            }
            for &s in cfg.successors(n) {
                if !seen[s] {
                    seen[s] = true;
                    worklist.push_back(s);
                }
            }
        }
    }

    fn tag(&mut self, site: NodeId, kind: BreakKind, reason: Option<&str>, evidence: Vec<(NodeId, String)>) {
        self.tags.push(GraphBreakTag {
            site,
            function: self.taint.function,
            kind,
            fixable: reason.is_none() && kind.may_be_fixable(),
            reason: reason.map(str::to_string),
            evidence,
        });
    }

    fn visit(&mut self, stmt: NodeId) {
        let ast = &self.ir.ast;
        match ast.kind(stmt) {
            NodeKind::If { .. } => {
                if let Some(ev) = self.dynamic_condition(ast.condition(stmt).unwrap()) {
                    self.tag(stmt, BreakKind::DynCtrlFl, None, ev);
                }
            }
            NodeKind::While => {
                if let Some(ev) = self.dynamic_condition(ast.condition(stmt).unwrap()) {
                    self.tag(stmt, BreakKind::DynCtrlFl, Some("loop"), ev);
                }
            }
            NodeKind::For { .. } => {
                let ev = self.dynamic_attrs(ast.child(stmt, 1));
                if !ev.is_empty() {
                    self.tag(stmt, BreakKind::DynCtrlFl, Some("loop"), ev);
                }
            }
            _ => {}
        }
        for e in ast.statement_exprs(stmt) {
            for n in ast.descendants_in_scope(e) {
                if matches!(ast.kind(n), NodeKind::Call) {
                    self.visit_call(n);
                }
            }
        }
    }

    /// Evidence that a condition depends on tensor values, if it does.
    fn dynamic_condition(&self, cond: NodeId) -> Option<Vec<(NodeId, String)>> {
        let ev = self.dynamic_attrs(cond);
        if !ev.is_empty() {
            return Some(ev);
        }
        if self.taint.expr_tainted(self.ir, &self.config.attr_table, cond) {
            let names: Vec<String> = self
                .taint
                .tainted_names(self.ir, cond)
                .into_iter()
                .filter_map(|n| self.ir.ast.name_id(n).map(str::to_string))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            return Some(vec![(cond, format!("depends on tainted {}", names.join(", ")))]);
        }
        None
    }

    /// Dynamic attributes read from tensor-valued receivers inside `expr`.
    fn dynamic_attrs(&self, expr: NodeId) -> Vec<(NodeId, String)> {
        let ir = self.ir;
        let ast = &ir.ast;
        let table = &self.config.attr_table;
        let mut out = Vec::new();
        for n in ast.descendants_in_scope(expr) {
            let NodeKind::Attribute { attr, .. } = ast.kind(n) else { continue };
            let receiver = ast.child(n, 0);
            let torch_recv = is_torch_rooted(ir, receiver)
                || (matches!(ast.kind(receiver), NodeKind::Name { .. }) && is_torch_module(ir, receiver));
            let tainted_recv = self.taint.expr_tainted(ir, table, receiver);
            let called = ast.parent(n).is_some_and(|p| matches!(ast.kind(p), NodeKind::Call) && ast.callee(p) == n);
            if table.is_dynamic(attr) && (tainted_recv || torch_recv) {
                out.push((n, format!("attr '{attr}' dynamic")));
            } else if !table.is_listed(attr) && called && tainted_recv {
                out.push((n, format!("attr '{attr}' not in table, tensor receiver")));
            }
        }
        out
    }

    fn visit_call(&mut self, call: NodeId) {
        let ir = self.ir;
        let ast = &ir.ast;
        let callee = ast.callee(call);
        if is_logger_call(ir, call) {
            if !in_epilogue(ir, call) {
                let what = ast.text(callee, ir.text()).to_string();
                self.tag(call, BreakKind::LoggerPrint, None, vec![(callee, format!("side effect `{what}`"))]);
            }
            return;
        }
        match ast.kind(callee) {
            NodeKind::Attribute { attr, .. } => {
                let receiver = ast.child(callee, 0);
                let tainted = self.taint.expr_tainted(ir, &self.config.attr_table, receiver);
                if (attr == "item" || attr == "data_ptr") && tainted {
                    self.tag(call, BreakKind::ItemAccess, Some("host read of tensor value"), vec![(callee, format!("`.{attr}()` on tensor"))]);
                    return;
                }
                let torch_recv = is_torch_rooted(ir, receiver)
                    || (matches!(ast.kind(receiver), NodeKind::Name { .. }) && is_torch_module(ir, receiver));
                if self.config.dynamic_shape_ops.contains(attr) && (tainted || torch_recv) {
                    self.tag(call, BreakKind::DynamicShapeOp, Some("dynamic-shape operator"), vec![(callee, format!("`{attr}` output shape depends on values"))]);
                    return;
                }
            }
            NodeKind::Name { id, .. } => {
                let from_torch = symbol(ir, callee).is_some_and(|s| {
                    matches!(&s.origin, SymbolOrigin::Import { module } if module.starts_with("torch."))
                });
                if from_torch && self.config.dynamic_shape_ops.contains(id) {
                    self.tag(call, BreakKind::DynamicShapeOp, Some("dynamic-shape operator"), vec![(callee, format!("`{id}` output shape depends on values"))]);
                    return;
                }
            }
            _ => {}
        }
        if let Some(def) = resolve_callee(ir, self.taint.function, call) {
            self.calls.push((call, def));
        }
    }
}

/// `print(...)`, `logger.x(...)`, `logging.x(...)`, `self.logger.x(...)`, or a
/// method on a name bound from `logging.getLogger`.
pub fn is_logger_call(ir: &UniIr, call: NodeId) -> bool {
    let ast = &ir.ast;
    if !matches!(ast.kind(call), NodeKind::Call) {
        return false;
    }
    let callee = ast.callee(call);
    match ast.kind(callee) {
        NodeKind::Name { id, .. } => {
            id == "print" && symbol(ir, callee).is_some_and(|s| s.origin == SymbolOrigin::External)
        }
        NodeKind::Attribute { .. } => {
            let base = ast.child(callee, 0);
            match ast.kind(base) {
                NodeKind::Name { id, .. } => id == "logger" || id == "logging" || bound_from_logging(ir, base),
                NodeKind::Attribute { attr, .. } => attr == "logger",
                _ => false,
            }
        }
        _ => false,
    }
}

fn bound_from_logging(ir: &UniIr, name: NodeId) -> bool {
    let ast = &ir.ast;
    let Some(sym) = symbol(ir, name) else { return false };
    sym.defs.iter().any(|&d| {
        let Some(assign) = ast.parent(d) else { return false };
        if !matches!(ast.kind(assign), NodeKind::Assign) {
            return false;
        }
        let value = *ast.children(assign).last().unwrap();
        if !matches!(ast.kind(value), NodeKind::Call) {
            return false;
        }
        let callee = ast.callee(value);
        let root = ast.chain_root(callee);
        let is_get_logger = match ast.kind(callee) {
            NodeKind::Attribute { attr, .. } => attr == "getLogger",
            NodeKind::Name { id, .. } => id == "getLogger",
            _ => false,
        };
        is_get_logger
            && root.and_then(|r| symbol(ir, r)).is_some_and(|s| {
                matches!(&s.origin, SymbolOrigin::Import { module } if module == "logging" || module.starts_with("logging."))
            })
    })
}

fn simple_arg(ir: &UniIr, arg: NodeId) -> bool {
    let ast = &ir.ast;
    match ast.kind(arg) {
        NodeKind::Name { .. } | NodeKind::Literal { .. } => true,
        NodeKind::Starred { .. } => matches!(ast.kind(ast.child(arg, 0)), NodeKind::Name { .. }),
        _ => false,
    }
}

fn is_epilogue_call_stmt(ir: &UniIr, stmt: NodeId) -> bool {
    let ast = &ir.ast;
    if !matches!(ast.kind(stmt), NodeKind::ExprStmt) {
        return false;
    }
    let call = ast.child(stmt, 0);
    is_logger_call(ir, call) && ast.call_args(call).iter().all(|&a| simple_arg(ir, a))
}

/// Already at the tail of its function: only other such calls and a trivial
/// `return` follow, so the traced region ends before it anyway.
pub fn in_epilogue(ir: &UniIr, call: NodeId) -> bool {
    let ast = &ir.ast;
    let Some(stmt) = ast.parent(call) else { return false };
    if !is_epilogue_call_stmt(ir, stmt) || ast.child(stmt, 0) != call {
        return false;
    }
    let Some(block) = ast.parent(stmt) else { return false };
    let Some(def) = ast.parent(block) else { return false };
    if !matches!(ast.kind(def), NodeKind::FunctionDef { .. }) {
        return false;
    }
    let stmts = ast.statements(block);
    let idx = stmts.iter().position(|&s| s == stmt).unwrap();
    let rest = &stmts[idx + 1..];
    let (last, middle) = match rest.split_last() {
        None => return true,
        Some(x) => x,
    };
    let last_ok = is_epilogue_call_stmt(ir, *last)
        || (matches!(ast.kind(*last), NodeKind::Return)
            && ast.children(*last).iter().all(|&v| matches!(ast.kind(v), NodeKind::Name { .. } | NodeKind::Literal { .. })));
    last_ok && middle.iter().all(|&s| is_epilogue_call_stmt(ir, s))
}

/// Statically resolvable same-file target of `call` made inside `caller`.
fn resolve_callee(ir: &UniIr, caller: NodeId, call: NodeId) -> Option<NodeId> {
    let ast = &ir.ast;
    let callee = ast.callee(call);
    match ast.kind(callee) {
        NodeKind::Name { .. } => {
            let def = single_def(ir, callee)?;
            let is_module_fn = matches!(ast.kind(def), NodeKind::FunctionDef { .. })
                && ast.parent(def) == Some(ast.root());
            is_module_fn.then_some(def)
        }
        NodeKind::Attribute { attr, .. } => {
            let base = ast.child(callee, 0);
            let class = owning_class(ir, caller)?;
            let first = *ast.params(caller).first()?;
            let self_name = match ast.kind(first) {
                NodeKind::Param { name, .. } => name,
                _ => return None,
            };
            match ast.kind(base) {
                NodeKind::Name { id, .. } if id == self_name => {
                    if let Some(m) = method_of(ir, class, attr) {
                        return Some(m);
                    }
                    let sub = submodule_class(ir, class, self_name, attr)?;
                    method_of(ir, sub, "forward")
                }
                _ => None,
            }
        }
        _ => None,
    }
}

/// Class `C` from `self.<attr> = C(...)` anywhere in `class`'s methods.
fn submodule_class(ir: &UniIr, class: NodeId, self_name: &str, attr: &str) -> Option<NodeId> {
    let ast = &ir.ast;
    for n in ast.descendants(ast.body(class)?) {
        if !matches!(ast.kind(n), NodeKind::Assign) {
            continue;
        }
        let (value, targets) = ast.children(n).split_last()?;
        let hit = targets.iter().any(|&t| {
            matches!(ast.kind(t), NodeKind::Attribute { attr: a, .. } if a == attr)
                && ast.name_id(ast.child(t, 0)) == Some(self_name)
        });
        if !hit || !matches!(ast.kind(*value), NodeKind::Call) {
            continue;
        }
        let ctor = ast.callee(*value);
        if matches!(ast.kind(ctor), NodeKind::Name { .. }) {
            if let Some(def) = single_def(ir, ctor) {
                if matches!(ast.kind(def), NodeKind::ClassDef { .. }) {
                    return Some(def);
                }
            }
        }
    }
    None
}

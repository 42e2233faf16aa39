//! If-conversion: a tensor-dependent `if` becomes straight-line assignments
//! merged with `torch.where`.

use std::collections::{HashMap, HashSet};

use super::names::FreshNames;
use crate::analysis::resolve::is_torch_rooted;
use crate::analysis::{NameList, TaintState, TorchAttrTable};
use crate::frontend::{NodeId, NodeKind, UnaryOpKind};
use crate::uniir::{SymbolOrigin, UniIr};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Name(String),
}

/// Expression text with its variable loads kept symbolic so they can be
/// renamed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Template(Vec<Piece>);

impl Template {
    fn text(s: impl Into<String>) -> Self {
        Template(vec![Piece::Text(s.into())])
    }

    fn name(s: impl Into<String>) -> Self {
        Template(vec![Piece::Name(s.into())])
    }

    fn then(mut self, other: Template) -> Self {
        self.0.extend(other.0);
        self
    }

    fn from_expr(ir: &UniIr, expr: NodeId) -> Self {
        let ast = &ir.ast;
        let text = ir.text();
        let span = ast.span(expr);
        let mut loads: Vec<(usize, usize, String)> = ast
            .descendants(expr)
            .into_iter()
            .filter_map(|n| match ast.kind(n) {
                NodeKind::Name { id, .. } => Some((ast.span(n).start, ast.span(n).end, id.clone())),
                _ => None,
            })
            .collect();
        loads.sort();
        let mut pieces = Vec::new();
        let mut at = span.start;
        for (start, end, id) in loads {
            if start > at {
                pieces.push(Piece::Text(text[at..start].to_string()));
            }
            pieces.push(Piece::Name(id));
            at = end;
        }
        if span.end > at {
            pieces.push(Piece::Text(text[at..span.end].to_string()));
        }
        Template(pieces)
    }

    fn rename(&self, map: &HashMap<String, String>) -> Self {
        Template(
            self.0
                .iter()
                .map(|p| match p {
                    Piece::Name(n) => Piece::Name(map.get(n).cloned().unwrap_or_else(|| n.clone())),
                    t => t.clone(),
                })
                .collect(),
        )
    }

    pub fn render(&self) -> String {
        self.0
            .iter()
            .map(|p| match p {
                Piece::Text(t) | Piece::Name(t) => t.as_str(),
            })
            .collect()
    }
}

/// One straight-line assignment produced by lowering.
#[derive(Debug, Clone)]
pub struct Lowered {
    pub target: String,
    pub rhs: Template,
    /// Tool-introduced temporary (never merged or renamed by an outer level).
    pub generated: bool,
    /// A store of `target` in the original tree, for symbol queries.
    pub node: Option<NodeId>,
}

pub(crate) struct Predicator<'a> {
    pub ir: &'a UniIr,
    pub taint: &'a TaintState,
    pub attr_table: &'a TorchAttrTable,
    pub allowlist: &'a NameList,
    pub names: FreshNames,
    /// Fixable DynCtrlFl tags on `if` statements: node to tag index.
    pub dyn_ifs: &'a HashMap<NodeId, usize>,
    /// Spans of unfixable call sites (item access, dynamic-shape ops).
    pub unfixable_spans: &'a [(usize, usize)],
    pub torch: String,
    /// Tags covered by the lowering so far.
    pub consumed: Vec<usize>,
}

impl<'a> Predicator<'a> {
    /// Lower an if/elif chain starting at `head`.
    pub fn lower_if(&mut self, head: NodeId) -> Result<Vec<Lowered>, String> {
        let ir = self.ir;
        let ast = &ir.ast;
        let function = self.taint.function;
        let mut arms = Vec::new();
        let else_block;
        let mut cur = head;
        loop {
            arms.push(cur);
            match ast.orelse(cur) {
                Some(e) if matches!(ast.kind(e), NodeKind::If { .. }) => cur = e,
                other => {
                    else_block = other;
                    break;
                }
            }
        }
        for &arm in &arms {
            match self.dyn_ifs.get(&arm) {
                Some(&tag) => self.consumed.push(tag),
                None => return Err("mixed elif chain".to_string()),
            }
        }
        for &arm in &arms {
            self.check_condition(ast.condition(arm).unwrap())?;
        }
        let preds: Vec<usize> = arms.iter().map(|_| self.names.next_pred(function)).collect();

        let mut out = Vec::new();
        for (&arm, &n) in arms.iter().zip(&preds) {
            let cond = ast.condition(arm).unwrap();
            out.push(Lowered {
                target: format!("__gm_pred_{n}"),
                rhs: Template::from_expr(ir, cond),
                generated: true,
                node: None,
            });
        }

        let mut targets: Vec<(String, Option<NodeId>)> = Vec::new();
        let mut arm_values: Vec<HashMap<String, String>> = Vec::new();
        let mut blocks: Vec<(NodeId, String)> = arms
            .iter()
            .zip(&preds)
            .map(|(&arm, &n)| (ast.body(arm).unwrap(), format!("then_{{}}_{n}")))
            .collect();
        if let Some(b) = else_block {
            blocks.push((b, format!("else_{{}}_{}", preds.last().unwrap())));
        }
        for (block, pattern) in blocks {
            let lowered = self.lower_block(block)?;
            let mut map: HashMap<String, String> = HashMap::new();
            for l in lowered {
                let rhs = l.rhs.rename(&map);
                if l.generated {
                    out.push(Lowered { rhs, ..l });
                    continue;
                }
                let temp = format!("__gm_{}", pattern.replace("{}", &l.target));
                if !targets.iter().any(|(t, _)| *t == l.target) {
                    targets.push((l.target.clone(), l.node));
                }
                map.insert(l.target.clone(), temp.clone());
                out.push(Lowered { target: temp, rhs, generated: true, node: None });
            }
            arm_values.push(map);
        }

        let has_else = else_block.is_some();
        for (t, node) in targets {
            let assigned_everywhere = has_else && arm_values.iter().all(|m| m.contains_key(&t));
            if !assigned_everywhere && !node.is_some_and(|n| self.has_prior_def(n, head)) {
                if node.is_some_and(|n| self.live_outside(n, head)) {
                    return Err("no prior definition".to_string());
                }
                continue;
            }
            let mut acc = match (has_else, arm_values.last().and_then(|m| m.get(&t))) {
                (true, Some(v)) => Template::name(v.clone()),
                _ => Template::name(t.clone()),
            };
            for (k, n) in preds.iter().enumerate().rev() {
                let value = arm_values[k].get(&t).cloned().unwrap_or_else(|| t.clone());
                acc = Template::text(format!("{}.where(", self.torch))
                    .then(Template::name(format!("__gm_pred_{n}")))
                    .then(Template::text(", "))
                    .then(Template::name(value))
                    .then(Template::text(", "))
                    .then(acc)
                    .then(Template::text(")"));
            }
            out.push(Lowered { target: t, rhs: acc, generated: false, node });
        }
        Ok(out)
    }

    fn lower_block(&mut self, block: NodeId) -> Result<Vec<Lowered>, String> {
        let ir = self.ir;
        let ast = &ir.ast;
        let mut out = Vec::new();
        for &stmt in ast.statements(block) {
            let children = ast.children(stmt);
            match ast.kind(stmt) {
                NodeKind::Pass => {}
                NodeKind::Assign => {
                    let [target, value] = children else {
                        return Err("non-name assignment target".to_string());
                    };
                    let NodeKind::Name { id, .. } = ast.kind(*target) else {
                        return Err("non-name assignment target".to_string());
                    };
                    if !self.pure(*value) {
                        return Err("impure branch".to_string());
                    }
                    out.push(Lowered {
                        target: id.clone(),
                        rhs: Template::from_expr(ir, *value),
                        generated: false,
                        node: Some(*target),
                    });
                }
                NodeKind::AugAssign { op } => {
                    let (target, value) = (children[0], children[1]);
                    let NodeKind::Name { id, .. } = ast.kind(target) else {
                        return Err("non-name assignment target".to_string());
                    };
                    if !self.pure(value) {
                        return Err("impure branch".to_string());
                    }
                    let rhs = Template::from_expr(ir, value);
                    let atomic = matches!(
                        ast.kind(value),
                        NodeKind::Name { .. }
                            | NodeKind::Literal { .. }
                            | NodeKind::Call
                            | NodeKind::Attribute { .. }
                            | NodeKind::Subscript { .. }
                    ) || ir.text()[ast.span(value).start..].starts_with('(');
                    let rhs = if atomic {
                        rhs
                    } else {
                        Template::text("(").then(rhs).then(Template::text(")"))
                    };
                    out.push(Lowered {
                        target: id.clone(),
                        rhs: Template::name(id.clone()).then(Template::text(format!(" {} ", op.symbol()))).then(rhs),
                        generated: false,
                        node: Some(target),
                    });
                }
                NodeKind::If { .. } if self.dyn_ifs.contains_key(&stmt) => {
                    out.extend(self.lower_if(stmt)?);
                }
                NodeKind::If { .. } => return Err("host control flow in branch".to_string()),
                NodeKind::Return => return Err("return in branch".to_string()),
                NodeKind::While | NodeKind::For { .. } => return Err("loop in branch".to_string()),
                NodeKind::Break | NodeKind::Continue | NodeKind::Raise => {
                    return Err("control flow in branch".to_string())
                }
                NodeKind::ExprStmt => return Err("impure branch".to_string()),
                _ => return Err("unsupported syntax".to_string()),
            }
        }
        Ok(out)
    }

    fn check_condition(&self, cond: NodeId) -> Result<(), String> {
        let ast = &self.ir.ast;
        let span = ast.span(cond);
        for n in ast.descendants(cond) {
            match ast.kind(n) {
                NodeKind::BoolOp { .. } | NodeKind::UnaryOp { op: UnaryOpKind::Not } => {
                    return Err("host boolean operator".to_string())
                }
                NodeKind::NamedExpr | NodeKind::Lambda | NodeKind::Await | NodeKind::Yield => {
                    return Err("unsupported syntax".to_string())
                }
                _ => {}
            }
        }
        if self.unfixable_spans.iter().any(|&(s, e)| span.start <= s && e <= span.end) {
            return Err("unfixable construct in condition".to_string());
        }
        Ok(())
    }

    /// Side-effect-free and traceable: names, literals, operators,
    /// subscripts, attribute loads, torch calls, allowlisted tensor methods.
    fn pure(&self, expr: NodeId) -> bool {
        let ir = self.ir;
        let ast = &ir.ast;
        let all = |nodes: &[NodeId]| nodes.iter().all(|&c| self.pure(c));
        match ast.kind(expr) {
            NodeKind::Name { .. } | NodeKind::Literal { .. } => true,
            NodeKind::BinOp { .. }
            | NodeKind::UnaryOp { .. }
            | NodeKind::Compare { .. }
            | NodeKind::Subscript { .. }
            | NodeKind::Slice { .. }
            | NodeKind::Tuple { .. }
            | NodeKind::List { .. }
            | NodeKind::Attribute { .. }
            | NodeKind::Keyword { .. }
            | NodeKind::Starred { .. } => all(ast.children(expr)),
            NodeKind::Call => {
                let callee = ast.callee(expr);
                let args = ast.call_args(expr);
                if is_torch_rooted(ir, callee) {
                    return all(args);
                }
                match ast.kind(callee) {
                    NodeKind::Attribute { attr, .. } if self.allowlist.contains(attr) => {
                        let receiver = ast.child(callee, 0);
                        let tensor = self.taint.expr_tainted(ir, self.attr_table, receiver)
                            || is_torch_rooted(ir, receiver);
                        tensor && self.pure(receiver) && all(args)
                    }
                    _ => false,
                }
            }
            _ => false,
        }
    }

    fn has_prior_def(&self, store: NodeId, head: NodeId) -> bool {
        let ir = self.ir;
        let Some(sym) = ir.symbols.symbol_of(store) else { return false };
        let start = ir.ast.span(head).start;
        let sym = ir.symbols.symbol(sym);
        sym.origin == SymbolOrigin::Parameter || sym.defs.iter().any(|&d| ir.ast.span(d).start < start)
    }

    fn live_outside(&self, store: NodeId, head: NodeId) -> bool {
        let ir = self.ir;
        let Some(sym) = ir.symbols.symbol_of(store) else { return true };
        let span = ir.ast.span(head);
        ir.symbols.symbol(sym).uses.iter().any(|&u| {
            let s = ir.ast.span(u).start;
            s < span.start || s >= span.end
        })
    }
}

/// Name torch is bound to where `node` sits, if any.
pub(crate) fn torch_binding(ir: &UniIr, node: NodeId) -> Option<String> {
    let scope = ir.symbols.scope_of(node)?;
    let mut candidates: Vec<&str> = ir
        .symbols
        .symbols()
        .iter()
        .filter(|s| matches!(&s.origin, SymbolOrigin::Import { module } if module == "torch"))
        .filter(|s| ir.symbols.lookup(scope, &s.name) == Some(s.id))
        .map(|s| s.name.as_str())
        .collect();
    candidates.sort();
    let seen: HashSet<&str> = candidates.iter().copied().collect();
    if seen.contains("torch") {
        return Some("torch".to_string());
    }
    candidates.first().map(|s| s.to_string())
}

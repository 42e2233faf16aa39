//! Safety gates, rewrite planning, and conversion of a plan to span edits.

use std::collections::{BTreeMap, HashMap};

use super::names::FreshNames;
use super::predicate::{torch_binding, Predicator};
use crate::analysis::{Analysis, AnalysisConfig, BreakKind, GraphBreakTag, NameList};
use crate::error::Result;
use crate::frontend::{NodeId, NodeKind, SpanEdit};
use crate::uniir::{function_statements, CfgNode, Dominators, EdgeKind, FunctionCfg, UniIr};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixOptions {
    pub analysis: AnalysisConfig,
    /// Tensor methods allowed inside predicated branches.
    pub allowlist: NameList,
}

impl Default for FixOptions {
    fn default() -> Self {
        FixOptions { analysis: AnalysisConfig::default(), allowlist: NameList::default_pure_ops() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TagOutcome {
    Fixed,
    Skipped(String),
    Unfixable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicationRewrite {
    /// First arm of the rewritten chain.
    pub if_node: NodeId,
    pub tags: Vec<usize>,
    /// Replacement statements, without indentation.
    pub lines: Vec<String>,
    /// The chain starts at an `elif` whose earlier arms stay: emit `else:`.
    pub as_else: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeferralRewrite {
    pub call_stmt: NodeId,
    pub tag: usize,
    pub capture_name: String,
    pub args_src: String,
    pub callee_src: String,
    /// Returns dominated by the call, in source order.
    pub epilogue_returns: Vec<NodeId>,
    /// The function can fall off its end after the call.
    pub falls_off: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rewrite {
    Predication(PredicationRewrite),
    Deferral(DeferralRewrite),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransformPlan {
    pub rewrites: Vec<Rewrite>,
    /// One entry per analysis tag.
    pub outcomes: Vec<TagOutcome>,
    /// Return statements whose value is hoisted, with the temp name.
    pub hoisted_returns: BTreeMap<NodeId, String>,
}

pub fn plan_fixes(ir: &UniIr, analysis: &Analysis, options: &FixOptions) -> TransformPlan {
    let ast = &ir.ast;
    let tags = &analysis.tags;
    let mut outcomes: Vec<TagOutcome> = tags
        .iter()
        .map(|t| match (&t.reason, t.fixable) {
            (_, true) => TagOutcome::Skipped("not planned".to_string()),
            (Some(r), false) => TagOutcome::Unfixable(r.clone()),
            (None, false) => TagOutcome::Unfixable(format!("{:?}", t.kind)),
        })
        .collect();
    let mut dyn_ifs: HashMap<NodeId, usize> = HashMap::new();
    let mut unfixable_spans = Vec::new();
    for (i, t) in tags.iter().enumerate() {
        match t.kind {
            BreakKind::DynCtrlFl if t.fixable && matches!(ast.kind(t.site), NodeKind::If { .. }) => {
                dyn_ifs.insert(t.site, i);
            }
            BreakKind::ItemAccess | BreakKind::DynamicShapeOp => {
                let s = ast.span(t.site);
                unfixable_spans.push((s.start, s.end));
            }
            _ => {}
        }
    }

    let mut names = FreshNames::new(ir);
    let mut rewrites = Vec::new();
    let mut hoisted_returns = BTreeMap::new();

    for f in &analysis.functions {
        let def = f.function;
        let mut heads: Vec<NodeId> = dyn_ifs
            .keys()
            .copied()
            .filter(|&s| tags[dyn_ifs[&s]].function == def)
            .filter(|&s| match ast.kind(s) {
                NodeKind::If { is_elif: true } => !ast.parent(s).is_some_and(|p| dyn_ifs.contains_key(&p)),
                _ => true,
            })
            .collect();
        heads.sort_by_key(|&h| ast.span(h).start);
        let mut covered: Vec<(usize, usize)> = Vec::new();
        for head in heads {
            let span = ast.span(head);
            if covered.iter().any(|&(s, e)| s <= span.start && span.end <= e) {
                continue;
            }
            let chain = chain_tags(ir, head, &dyn_ifs);
            let Some(torch) = torch_binding(ir, head) else {
                for i in chain {
                    outcomes[i] = TagOutcome::Skipped("torch not in scope".to_string());
                }
                continue;
            };
            let mut p = Predicator {
                ir,
                taint: &f.taint,
                attr_table: &options.analysis.attr_table,
                allowlist: &options.allowlist,
                names: names.clone(),
                dyn_ifs: &dyn_ifs,
                unfixable_spans: &unfixable_spans,
                torch,
                consumed: Vec::new(),
            };
            match p.lower_if(head) {
                Ok(lowered) => {
                    names = p.names;
                    for &i in &p.consumed {
                        outcomes[i] = TagOutcome::Fixed;
                    }
                    covered.push((span.start, span.end));
                    rewrites.push(Rewrite::Predication(PredicationRewrite {
                        if_node: head,
                        tags: p.consumed,
                        lines: lowered.iter().map(|l| format!("{} = {}", l.target, l.rhs.render())).collect(),
                        as_else: matches!(ast.kind(head), NodeKind::If { is_elif: true }),
                    }));
                }
                Err(reason) => {
                    for i in chain {
                        outcomes[i] = TagOutcome::Skipped(reason.clone());
                    }
                }
            }
        }

        let cfg = ir.cfg.function(def).unwrap();
        let dom = Dominators::compute(cfg);
        let mut deferred: Vec<DeferralRewrite> = Vec::new();
        for (i, t) in tags.iter().enumerate() {
            if t.function != def || t.kind != BreakKind::LoggerPrint || !t.fixable {
                continue;
            }
            match plan_deferral(ir, cfg, &dom, t) {
                Ok(mut d) => {
                    d.tag = i;
                    deferred.push(d);
                }
                Err(reason) => outcomes[i] = TagOutcome::Skipped(reason),
            }
        }
        deferred.sort_by_key(|d| ast.span(d.call_stmt).start);
        for mut d in deferred {
            d.capture_name = names.next(def, "defer");
            outcomes[d.tag] = TagOutcome::Fixed;
            rewrites.push(Rewrite::Deferral(d));
        }
        let mut returns: Vec<NodeId> = rewrites
            .iter()
            .filter_map(|r| match r {
                Rewrite::Deferral(d) if tags[d.tag].function == def => Some(d.epilogue_returns.clone()),
                _ => None,
            })
            .flatten()
            .collect();
        returns.sort_by_key(|&r| ast.span(r).start);
        returns.dedup();
        for r in returns {
            if let Some(&value) = ast.children(r).first() {
                if !matches!(ast.kind(value), NodeKind::Name { .. } | NodeKind::Literal { .. }) {
                    hoisted_returns.insert(r, names.next(def, "ret"));
                }
            }
        }
    }
    TransformPlan { rewrites, outcomes, hoisted_returns }
}

/// Tags of every `if` arm in the chain headed by `head`.
fn chain_tags(ir: &UniIr, head: NodeId, dyn_ifs: &HashMap<NodeId, usize>) -> Vec<usize> {
    let mut out = Vec::new();
    let mut cur = Some(head);
    while let Some(c) = cur {
        if let Some(&i) = dyn_ifs.get(&c) {
            out.push(i);
        }
        cur = ir.ast.orelse(c).filter(|&e| matches!(ir.ast.kind(e), NodeKind::If { .. }));
    }
    out
}

fn plan_deferral(ir: &UniIr, cfg: &FunctionCfg, dom: &Dominators, tag: &GraphBreakTag) -> Result<DeferralRewrite, String> {
    let ast = &ir.ast;
    let src = &ir.source;
    let call = tag.site;
    let stmt = ast.parent(call).unwrap();
    if !matches!(ast.kind(stmt), NodeKind::ExprStmt) || ast.child(stmt, 0) != call {
        return Err("value used".to_string());
    }
    let def = tag.function;
    let body = ast.body(def).unwrap();
    if ast.parent(stmt) != Some(body) {
        return Err("nested in control flow".to_string());
    }
    let first = ast.statements(body)[0];
    if !src.starts_line(ast.span(first).start) {
        return Err("single-line block".to_string());
    }
    let args = ast.call_args(call);
    if args.iter().any(|&a| matches!(ast.kind(a), NodeKind::Keyword { .. })) {
        return Err("keyword arguments".to_string());
    }
    let at = cfg.index_of(stmt).ok_or("unreachable")?;

    let mut epilogue_returns = Vec::new();
    for s in function_statements(ast, def) {
        if !matches!(ast.kind(s), NodeKind::Return) {
            continue;
        }
        let Some(i) = cfg.index_of(s) else { continue };
        if dom.dominates(at, i) {
            if !src.starts_line(ast.span(s).start) {
                return Err("single-line block".to_string());
            }
            epilogue_returns.push(s);
        }
    }
    let falls_off = cfg.in_edges(FunctionCfg::EXIT).any(|e| {
        e.kind != EdgeKind::Return
            && match cfg.node(e.from) {
                CfgNode::Stmt(s) => !matches!(ast.kind(s), NodeKind::Raise) && dom.dominates(at, e.from),
                _ => false,
            }
    });
    if epilogue_returns.is_empty() && !falls_off {
        return Err("no epilogue".to_string());
    }
    let args_src = match (args.first(), args.last()) {
        (Some(&a), Some(&b)) => ir.text()[ast.span(a).start..ast.span(b).end].to_string(),
        _ => String::new(),
    };
    Ok(DeferralRewrite {
        call_stmt: stmt,
        tag: 0,
        capture_name: String::new(),
        args_src,
        callee_src: ast.text(ast.callee(call), ir.text()).to_string(),
        epilogue_returns,
        falls_off,
    })
}

/// Turn a plan into one non-overlapping edit set.
pub fn apply_plan(ir: &UniIr, plan: &TransformPlan) -> Result<Vec<SpanEdit>> {
    let ast = &ir.ast;
    let src = &ir.source;
    let text = ir.text();
    let mut edits = Vec::new();
    let mut by_function: BTreeMap<NodeId, Vec<&DeferralRewrite>> = BTreeMap::new();

    for r in &plan.rewrites {
        match r {
            Rewrite::Predication(p) => {
                let span = ast.span(p.if_node);
                let indent = src.indent_of(span.start).to_string();
                let replacement = if p.as_else {
                    let body_first = ast.statements(ast.body(p.if_node).unwrap())[0];
                    let inner = if src.starts_line(ast.span(body_first).start) {
                        src.indent_of(ast.span(body_first).start).to_string()
                    } else {
                        format!("{indent}    ")
                    };
                    let mut s = "else:".to_string();
                    for line in &p.lines {
                        s.push('\n');
                        s.push_str(&inner);
                        s.push_str(line);
                    }
                    s
                } else {
                    p.lines.join(&format!("\n{indent}"))
                };
                edits.push(SpanEdit::new(span.start, span.end, replacement));
            }
            Rewrite::Deferral(d) => {
                let def = ast.enclosing_function(d.call_stmt).unwrap();
                by_function.entry(def).or_default().push(d);
            }
        }
    }

    for (def, mut group) in by_function {
        group.sort_by_key(|d| ast.span(d.call_stmt).start);
        for d in &group {
            let span = ast.span(d.call_stmt);
            let tuple = match ast.call_args(ast.child(d.call_stmt, 0)).len() {
                0 => "()".to_string(),
                1 => format!("({},)", d.args_src),
                _ => format!("({})", d.args_src),
            };
            edits.push(SpanEdit::new(span.start, span.end, format!("{} = {tuple}", d.capture_name)));
        }
        let replay = |d: &DeferralRewrite| format!("{}(*{})", d.callee_src, d.capture_name);

        let mut returns: Vec<NodeId> = group.iter().flat_map(|d| d.epilogue_returns.iter().copied()).collect();
        returns.sort_by_key(|&r| ast.span(r).start);
        returns.dedup();
        for r in returns {
            let span = ast.span(r);
            let indent = src.indent_of(span.start).to_string();
            let replays: Vec<String> =
                group.iter().filter(|d| d.epilogue_returns.contains(&r)).map(|d| replay(d)).collect();
            let sep = format!("\n{indent}");
            match plan.hoisted_returns.get(&r) {
                Some(temp) => {
                    let value = ast.text(ast.child(r, 0), text);
                    let mut lines = vec![format!("{temp} = {value}")];
                    lines.extend(replays);
                    lines.push(format!("return {temp}"));
                    edits.push(SpanEdit::new(span.start, span.end, lines.join(&sep)));
                }
                None => edits.push(SpanEdit::insert(span.start, format!("{}{sep}", replays.join(&sep)))),
            }
        }

        let tail: Vec<String> = group.iter().filter(|d| d.falls_off).map(|d| replay(d)).collect();
        if !tail.is_empty() {
            let body = ast.statements(ast.body(def).unwrap());
            let indent = src.indent_of(ast.span(body[0]).start).to_string();
            let last = *body.last().unwrap();
            let at = src.line_end_of(ast.span(last).end);
            let mut s = String::new();
            for line in tail {
                s.push('\n');
                s.push_str(&indent);
                s.push_str(&line);
            }
            edits.push(SpanEdit::insert(at, s));
        }
    }
    edits.sort_by_key(|e| (e.start, e.end));
    Ok(edits)
}

//! Property bodies shared by the proptest suites and the acceptance run.

use std::collections::BTreeSet;

use graphmend_core::analysis::{compute_taint, compute_taint_with_seeds, parameter_symbols, TaintSet};
use graphmend_core::uniir::{function_statements, Dominators, FunctionCfg, SymbolId, UniIr};
use graphmend_core::{NodeKind, SourceModule, TorchAttrTable};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::{all_reachable, count_statements, render, Stmt, VARS};

type Outcome = Result<(), TestCaseError>;

pub fn build(text: &str) -> UniIr {
    UniIr::build(SourceModule::new("gen.py", text)).expect("generated program parses")
}

/// Every simple path from ENTRY to `target`, as node lists.
pub fn simple_paths(cfg: &FunctionCfg, target: usize) -> Vec<Vec<usize>> {
    fn walk(cfg: &FunctionCfg, at: usize, target: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at == target {
            out.push(path.clone());
            return;
        }
        for &s in cfg.successors(at) {
            if !path.contains(&s) {
                path.push(s);
                walk(cfg, s, target, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(cfg, FunctionCfg::ENTRY, target, &mut vec![FunctionCfg::ENTRY], &mut out);
    out
}

/// Flow-insensitive closure: a target is tainted once any assignment to it
/// reads a tainted name, repeated until nothing changes.
pub fn naive_closure(ir: &UniIr, seeds: &TaintSet) -> TaintSet {
    let ast = &ir.ast;
    let mut edges: Vec<(Vec<SymbolId>, SymbolId)> = Vec::new();
    for n in ast.descendants(ast.root()) {
        let (value, targets) = match ast.kind(n) {
            NodeKind::Assign => {
                let (v, t) = ast.children(n).split_last().unwrap();
                (*v, t.to_vec())
            }
            NodeKind::AugAssign { .. } => (ast.child(n, 1), vec![ast.child(n, 0)]),
            _ => continue,
        };
        let mut reads: Vec<SymbolId> = ast
            .descendants(value)
            .into_iter()
            .filter_map(|d| ir.symbols.symbol_of(d))
            .collect();
        if matches!(ast.kind(n), NodeKind::AugAssign { .. }) {
            reads.extend(ir.symbols.symbol_of(targets[0]));
        }
        for t in targets {
            edges.push((reads.clone(), ir.symbols.symbol_of(t).unwrap()));
        }
    }
    let mut tainted = seeds.clone();
    loop {
        let before = tainted.len();
        for (reads, target) in &edges {
            if reads.iter().any(|r| tainted.contains(r)) {
                tainted.insert(*target);
            }
        }
        if tainted.len() == before {
            return tainted;
        }
    }
}

/// Straight-line code where each local is assigned once, after the names it
/// reads.
pub fn straight_line() -> impl Strategy<Value = String> {
    prop::collection::vec((prop::collection::vec(any::<prop::sample::Index>(), 0..3), any::<bool>()), 1..4).prop_map(
        |rows| {
            let mut out = String::from("def f(a, b):\n");
            let locals = ["c", "d", "e"];
            for (i, (srcs, aug)) in rows.iter().enumerate() {
                let avail = &VARS[..2 + i];
                let rhs = if srcs.is_empty() {
                    "1".to_string()
                } else {
                    srcs.iter().map(|ix| *ix.get(avail)).collect::<Vec<_>>().join(" * ")
                };
                out.push_str(&format!("    {} = {rhs}\n", locals[i]));
                if *aug {
                    out.push_str(&format!("    {} += 2\n", locals[i]));
                }
            }
            out.push_str("    return a\n");
            out
        },
    )
}

fn seeds_of(ir: &UniIr) -> TaintSet {
    parameter_symbols(ir, ir.ast.functions()[0]).into_iter().collect()
}

pub fn cfg_node_count(body: &[Stmt]) -> Outcome {
    prop_assume!(all_reachable(body));
    let text = render(body);
    let ir = build(&text);
    let def = ir.ast.functions()[0];
    let cfg = ir.cfg.function(def).unwrap();
    let stmts = count_statements(body);
    prop_assert_eq!(function_statements(&ir.ast, def).len(), stmts);
    prop_assert_eq!(cfg.len(), stmts + 2, "{}", text);
    Ok(())
}

pub fn dominators_match_paths(body: &[Stmt]) -> Outcome {
    let text = render(body);
    let ir = build(&text);
    let def = ir.ast.functions()[0];
    let cfg = ir.cfg.function(def).unwrap();
    prop_assume!(cfg.len() <= 12);
    let dom = Dominators::compute(cfg);
    for b in 0..cfg.len() {
        let paths = simple_paths(cfg, b);
        for a in 0..cfg.len() {
            let expected = paths.iter().all(|p| p.contains(&a));
            prop_assert_eq!(dom.dominates(a, b), expected, "a={} b={}\n{}", a, b, text);
        }
    }
    Ok(())
}

pub fn heal_idempotent(body: &[Stmt]) -> Outcome {
    let text = render(body);
    let mut ir = build(&text);
    ir.heal().unwrap();
    let first = (ir.symbols.clone(), ir.cfg.clone());
    ir.heal().unwrap();
    prop_assert_eq!(&first.0, &ir.symbols);
    prop_assert_eq!(&first.1, &ir.cfg);
    ir.replace_source(text.clone()).unwrap();
    prop_assert_eq!(&first.1, &ir.cfg);
    Ok(())
}

pub fn taint_equals_closure(text: &str) -> Outcome {
    let ir = build(text);
    let def = ir.ast.functions()[0];
    let state = compute_taint(&ir, &TorchAttrTable::default(), def);
    let closure = naive_closure(&ir, &seeds_of(&ir));
    prop_assert_eq!(state.tainted_anywhere(), closure, "{}", text);
    Ok(())
}

pub fn taint_within_closure(body: &[Stmt]) -> Outcome {
    let text = render(body);
    let ir = build(&text);
    let def = ir.ast.functions()[0];
    let state = compute_taint(&ir, &TorchAttrTable::default(), def);
    let closure = naive_closure(&ir, &seeds_of(&ir));
    let anywhere = state.tainted_anywhere();
    prop_assert!(anywhere.is_subset(&closure), "{}\n{:?} vs {:?}", text, anywhere, closure);
    Ok(())
}

pub fn seeds_are_monotone(body: &[Stmt]) -> Outcome {
    let text = render(body);
    let ir = build(&text);
    let def = ir.ast.functions()[0];
    let table = TorchAttrTable::default();
    let params = parameter_symbols(&ir, def);
    let small: TaintSet = params.iter().take(1).copied().collect();
    let large: TaintSet = params.iter().copied().collect();
    let a = compute_taint_with_seeds(&ir, &table, def, small);
    let b = compute_taint_with_seeds(&ir, &table, def, large);
    let stmts: BTreeSet<_> = function_statements(&ir.ast, def).into_iter().collect();
    for s in stmts {
        prop_assert!(a.before(s).is_subset(b.before(s)));
    }
    prop_assert!(a.at_exit().is_subset(b.at_exit()));
    Ok(())
}

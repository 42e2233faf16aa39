//! Fresh identifier allocation.

use std::collections::{HashMap, HashSet};

use crate::frontend::{NodeId, NodeKind};
use crate::uniir::UniIr;

/// Hands out `__gm_<kind>_<n>` names. Counters are per function and kind;
/// every candidate is checked against all names already in the file.
#[derive(Debug, Clone)]
pub struct FreshNames {
    taken: HashSet<String>,
    allocated: HashMap<NodeId, HashSet<String>>,
    counters: HashMap<(NodeId, &'static str), usize>,
}

impl FreshNames {
    pub fn new(ir: &UniIr) -> Self {
        let mut taken: HashSet<String> = ir.symbols.symbols().iter().map(|s| s.name.clone()).collect();
        for node in ir.ast.nodes() {
            match &node.kind {
                NodeKind::Name { id, .. } => {
                    taken.insert(id.clone());
                }
                NodeKind::Attribute { attr, .. } => {
                    taken.insert(attr.clone());
                }
                NodeKind::Param { name, .. } => {
                    taken.insert(name.clone());
                }
                _ => {}
            }
        }
        FreshNames { taken, allocated: HashMap::new(), counters: HashMap::new() }
    }

    fn is_free(&self, function: NodeId, name: &str) -> bool {
        !self.taken.contains(name) && !self.allocated.get(&function).is_some_and(|a| a.contains(name))
    }

    /// `__gm_defer_<n>`, `__gm_ret_<n>`, ...
    pub fn next(&mut self, function: NodeId, kind: &'static str) -> String {
        loop {
            let counter = self.counters.entry((function, kind)).or_insert(0);
            let name = format!("__gm_{kind}_{counter}");
            *counter += 1;
            if self.is_free(function, &name) {
                self.allocated.entry(function).or_default().insert(name.clone());
                return name;
            }
        }
    }

    /// Index for a predication: `__gm_pred_<n>` is free and no
    /// `__gm_then_*_<n>` / `__gm_else_*_<n>` exists yet.
    pub fn next_pred(&mut self, function: NodeId) -> usize {
        loop {
            let counter = self.counters.entry((function, "pred")).or_insert(0);
            let n = *counter;
            *counter += 1;
            let pred = format!("__gm_pred_{n}");
            let suffix = format!("_{n}");
            let clash = !self.is_free(function, &pred)
                || self.taken.iter().any(|t| {
                    (t.starts_with("__gm_then_") || t.starts_with("__gm_else_")) && t.ends_with(&suffix)
                });
            if !clash {
                self.allocated.entry(function).or_default().insert(pred);
                return n;
            }
        }
    }
}

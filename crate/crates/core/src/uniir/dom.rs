//! Iterative dominator analysis (Cooper, Harvey & Kennedy).

use super::cfg::FunctionCfg;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dominators {
    /// Immediate dominator per node; ENTRY maps to itself, unreachable nodes to `None`.
    idom: Vec<Option<usize>>,
}

impl Dominators {
    pub fn compute(cfg: &FunctionCfg) -> Self {
        let n = cfg.len();
        let order = reverse_postorder(cfg);
        let mut rpo_pos = vec![usize::MAX; n];
        for (i, &node) in order.iter().enumerate() {
            rpo_pos[node] = i;
        }
        let mut idom: Vec<Option<usize>> = vec![None; n];
        idom[FunctionCfg::ENTRY] = Some(FunctionCfg::ENTRY);
        let mut changed = true;
        while changed {
            changed = false;
            for &b in order.iter().skip(1) {
                let mut new_idom: Option<usize> = None;
                for &p in cfg.predecessors(b) {
                    if idom[p].is_none() {
                        continue;
                    }
                    new_idom = Some(match new_idom {
                        None => p,
                        Some(cur) => intersect(&idom, &rpo_pos, p, cur),
                    });
                }
                if new_idom.is_some() && idom[b] != new_idom {
                    idom[b] = new_idom;
                    changed = true;
                }
            }
        }
        Dominators { idom }
    }

    pub fn idom(&self, node: usize) -> Option<usize> {
        match self.idom[node] {
            Some(d) if d == node => None,
            other => other,
        }
    }

    /// True iff every path from ENTRY to `b` passes through `a`. Vacuously
    /// true when `b` is unreachable.
    pub fn dominates(&self, a: usize, b: usize) -> bool {
        if self.idom[b].is_none() {
            return true;
        }
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            match self.idom[cur] {
                Some(d) if d != cur => cur = d,
                _ => return false,
            }
        }
    }
}

fn intersect(idom: &[Option<usize>], rpo_pos: &[usize], mut a: usize, mut b: usize) -> usize {
    while a != b {
        while rpo_pos[a] > rpo_pos[b] {
            a = idom[a].unwrap();
        }
        while rpo_pos[b] > rpo_pos[a] {
            b = idom[b].unwrap();
        }
    }
    a
}

fn reverse_postorder(cfg: &FunctionCfg) -> Vec<usize> {
    let mut seen = vec![false; cfg.len()];
    let mut post = Vec::with_capacity(cfg.len());
    let mut stack = vec![(FunctionCfg::ENTRY, 0usize)];
    seen[FunctionCfg::ENTRY] = true;
    while let Some((node, i)) = stack.pop() {
        let succs = cfg.successors(node);
        if i < succs.len() {
            stack.push((node, i + 1));
            let s = succs[i];
            if !seen[s] {
                seen[s] = true;
                stack.push((s, 0));
            }
        } else {
            post.push(node);
        }
    }
    post.reverse();
    post
}

/// Convenience wrapper: does CFG node `a` dominate node `b`?
pub fn dominates(cfg: &FunctionCfg, a: usize, b: usize) -> bool {
    Dominators::compute(cfg).dominates(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_module, NodeKind, SourceModule};
    use crate::uniir::cfg::{build_function_cfg, CfgNode};

    const BRANCHY: &str = "def f(x, y):\n    x_1 = x*2\n    y_1 = y*2\n    if x.sum() > 10:\n        z = x_1 + y_1\n    else:\n        z = x_1 * y_1\n    return torch.relu(z)\n";

    #[test]
    fn entry_dominates_everything() {
        let src = SourceModule::new("t.py", BRANCHY);
        let ast = parse_module(&src).unwrap();
        let cfg = build_function_cfg(&ast, ast.functions()[0]);
        let dom = Dominators::compute(&cfg);
        for i in 0..cfg.len() {
            assert!(dom.dominates(FunctionCfg::ENTRY, i));
        }
    }

    #[test]
    fn branch_assignments_vs_join() {
        let src = SourceModule::new("t.py", BRANCHY);
        let ast = parse_module(&src).unwrap();
        let cfg = build_function_cfg(&ast, ast.functions()[0]);
        let find = |pred: &dyn Fn(&NodeKind) -> bool| -> Vec<usize> {
            (0..cfg.len())
                .filter(|&i| matches!(cfg.node(i), CfgNode::Stmt(s) if pred(ast.kind(s))))
                .collect()
        };
        let if_node = find(&|k| matches!(k, NodeKind::If { .. }))[0];
        let ret = find(&|k| matches!(k, NodeKind::Return))[0];
        let assigns = find(&|k| matches!(k, NodeKind::Assign));
        let branch_assigns = &assigns[2..];
        let dom = Dominators::compute(&cfg);
        for &a in branch_assigns {
            assert!(dom.dominates(if_node, a));
            assert!(!dom.dominates(a, ret));
        }
        assert!(dom.dominates(if_node, ret));
        assert_eq!(dom.idom(ret), Some(if_node));
    }
}

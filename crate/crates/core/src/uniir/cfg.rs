//! Statement-granularity control-flow graphs, one per function.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use crate::frontend::{Ast, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CfgNode {
    Entry,
    Exit,
    Stmt(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeKind {
    Fallthrough,
    TrueBranch,
    FalseBranch,
    LoopBack,
    Return,
}

impl EdgeKind {
    pub fn label(self) -> &'static str {
        match self {
            EdgeKind::Fallthrough => "fallthrough",
            EdgeKind::TrueBranch => "true-branch",
            EdgeKind::FalseBranch => "false-branch",
            EdgeKind::LoopBack => "loop-back",
            EdgeKind::Return => "return",
        }
    }

    pub fn is_branch(self) -> bool {
        matches!(self, EdgeKind::TrueBranch | EdgeKind::FalseBranch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CfgEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

/// CFG of one function. Node 0 is ENTRY and node 1 is EXIT; the rest are
/// reachable statements in source order of discovery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionCfg {
    pub function: NodeId,
    nodes: Vec<CfgNode>,
    edges: Vec<CfgEdge>,
    index: HashMap<NodeId, usize>,
    succs: Vec<Vec<usize>>,
    preds: Vec<Vec<usize>>,
    /// Statements that no path from ENTRY reaches (outermost only).
    pub unreachable: Vec<NodeId>,
}

impl FunctionCfg {
    pub const ENTRY: usize = 0;
    pub const EXIT: usize = 1;

    pub fn nodes(&self) -> &[CfgNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[CfgEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> CfgNode {
        self.nodes[i]
    }

    pub fn index_of(&self, stmt: NodeId) -> Option<usize> {
        self.index.get(&stmt).copied()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succs[i]
    }

    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.preds[i]
    }

    pub fn out_edges(&self, i: usize) -> impl Iterator<Item = &CfgEdge> + '_ {
        self.edges.iter().filter(move |e| e.from == i)
    }

    pub fn in_edges(&self, i: usize) -> impl Iterator<Item = &CfgEdge> + '_ {
        self.edges.iter().filter(move |e| e.to == i)
    }

    pub fn branch_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.kind.is_branch()).count()
    }

    /// Nodes reachable from ENTRY, breadth-first.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([Self::ENTRY]);
        seen[Self::ENTRY] = true;
        while let Some(n) = queue.pop_front() {
            for &s in &self.succs[n] {
                if !seen[s] {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
        seen
    }

    fn add_node(&mut self, node: CfgNode) -> usize {
        let i = self.nodes.len();
        self.nodes.push(node);
        self.succs.push(Vec::new());
        self.preds.push(Vec::new());
        if let CfgNode::Stmt(s) = node {
            self.index.insert(s, i);
        }
        i
    }

    fn add_edge(&mut self, from: usize, to: usize, kind: EdgeKind) {
        self.edges.push(CfgEdge { from, to, kind });
        if !self.succs[from].contains(&to) {
            self.succs[from].push(to);
        }
        if !self.preds[to].contains(&from) {
            self.preds[to].push(from);
        }
    }
}

/// Per-function CFGs keyed by the function-def node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cfg {
    pub functions: BTreeMap<NodeId, FunctionCfg>,
}

impl Cfg {
    pub fn function(&self, def: NodeId) -> Option<&FunctionCfg> {
        self.functions.get(&def)
    }
}

pub fn build_cfg(ast: &Ast) -> Cfg {
    let mut cfg = Cfg::default();
    for def in ast.functions() {
        cfg.functions.insert(def, build_function_cfg(ast, def));
    }
    cfg
}

type Pending = Vec<(usize, EdgeKind)>;

struct LoopFrame {
    header: usize,
    breaks: Vec<usize>,
}

struct Builder<'a> {
    ast: &'a Ast,
    cfg: FunctionCfg,
    loops: Vec<LoopFrame>,
}

pub fn build_function_cfg(ast: &Ast, def: NodeId) -> FunctionCfg {
    let mut b = Builder {
        ast,
        cfg: FunctionCfg {
            function: def,
            nodes: Vec::new(),
            edges: Vec::new(),
            index: HashMap::new(),
            succs: Vec::new(),
            preds: Vec::new(),
            unreachable: Vec::new(),
        },
        loops: Vec::new(),
    };
    b.cfg.add_node(CfgNode::Entry);
    b.cfg.add_node(CfgNode::Exit);
    let body = ast.body(def).expect("function has a body");
    let out = b.seq(ast.children(body), vec![(FunctionCfg::ENTRY, EdgeKind::Fallthrough)]);
    b.connect(out, FunctionCfg::EXIT);
    b.cfg
}

impl<'a> Builder<'a> {
    fn connect(&mut self, pending: Pending, to: usize) {
        for (from, kind) in pending {
            self.cfg.add_edge(from, to, kind);
        }
    }

    fn connect_loop_back(&mut self, pending: Pending, header: usize) {
        for (from, kind) in pending {
            let kind = if kind == EdgeKind::Fallthrough { EdgeKind::LoopBack } else { kind };
            self.cfg.add_edge(from, header, kind);
        }
    }

    fn seq(&mut self, stmts: &[NodeId], mut pending: Pending) -> Pending {
        for &s in stmts {
            if pending.is_empty() {
                self.cfg.unreachable.push(s);
                continue;
            }
            pending = self.stmt(s, pending);
        }
        pending
    }

    fn block(&mut self, block: NodeId, pending: Pending) -> Pending {
        let stmts = self.ast.children(block).to_vec();
        self.seq(&stmts, pending)
    }

    fn stmt(&mut self, s: NodeId, pending: Pending) -> Pending {
        let ast = self.ast;
        let n = self.cfg.add_node(CfgNode::Stmt(s));
        self.connect(pending, n);
        match ast.kind(s) {
            NodeKind::If { .. } => {
                let mut out = self.block(ast.body(s).unwrap(), vec![(n, EdgeKind::TrueBranch)]);
                match ast.orelse(s) {
                    Some(e) if matches!(ast.kind(e), NodeKind::If { .. }) => {
                        out.extend(self.stmt(e, vec![(n, EdgeKind::FalseBranch)]));
                    }
                    Some(e) => out.extend(self.block(e, vec![(n, EdgeKind::FalseBranch)])),
                    None => out.push((n, EdgeKind::FalseBranch)),
                }
                out
            }
            NodeKind::While | NodeKind::For { .. } => {
                self.loops.push(LoopFrame { header: n, breaks: Vec::new() });
                let body_out = self.block(ast.body(s).unwrap(), vec![(n, EdgeKind::TrueBranch)]);
                self.connect_loop_back(body_out, n);
                let frame = self.loops.pop().unwrap();
                let mut out = match ast.orelse(s) {
                    Some(e) => self.block(e, vec![(n, EdgeKind::FalseBranch)]),
                    None => vec![(n, EdgeKind::FalseBranch)],
                };
                out.extend(frame.breaks.into_iter().map(|b| (b, EdgeKind::Fallthrough)));
                out
            }
            NodeKind::Return => {
                self.cfg.add_edge(n, FunctionCfg::EXIT, EdgeKind::Return);
                Vec::new()
            }
            NodeKind::Raise => {
                self.cfg.add_edge(n, FunctionCfg::EXIT, EdgeKind::Fallthrough);
                Vec::new()
            }
            NodeKind::Break => match self.loops.last_mut() {
                Some(frame) => {
                    frame.breaks.push(n);
                    Vec::new()
                }
                None => vec![(n, EdgeKind::Fallthrough)],
            },
            NodeKind::Continue => match self.loops.last() {
                Some(frame) => {
                    let header = frame.header;
                    self.cfg.add_edge(n, header, EdgeKind::LoopBack);
                    Vec::new()
                }
                None => vec![(n, EdgeKind::Fallthrough)],
            },
            NodeKind::Try { has_finally, .. } => {
                let children = ast.children(s).to_vec();
                let mut normal = self.block(children[0], vec![(n, EdgeKind::Fallthrough)]);
                let mut handler_out = Vec::new();
                for &h in &children[1..] {
                    if matches!(ast.kind(h), NodeKind::ExceptHandler { .. }) {
                        handler_out.extend(self.block(ast.body(h).unwrap(), vec![(n, EdgeKind::Fallthrough)]));
                    }
                }
                if let Some(e) = ast.orelse(s) {
                    normal = self.block(e, normal);
                }
                normal.extend(handler_out);
                if *has_finally {
                    normal = self.block(*children.last().unwrap(), normal);
                }
                normal
            }
            NodeKind::With { .. } => self.block(ast.body(s).unwrap(), vec![(n, EdgeKind::Fallthrough)]),
            _ => vec![(n, EdgeKind::Fallthrough)],
        }
    }
}

/// Statements that belong to `def`'s own body (not to nested defs or classes).
pub fn function_statements(ast: &Ast, def: NodeId) -> Vec<NodeId> {
    let body = ast.body(def).unwrap();
    ast.descendants_in_scope(body)
        .into_iter()
        .filter(|&n| ast.kind(n).is_statement())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_module, SourceModule};

    fn cfg_of(text: &str) -> (Ast, FunctionCfg) {
        let src = SourceModule::new("t.py", text);
        let ast = parse_module(&src).unwrap();
        let def = ast.functions()[0];
        let cfg = build_function_cfg(&ast, def);
        (ast, cfg)
    }

    fn label(ast: &Ast, cfg: &FunctionCfg, i: usize) -> String {
        match cfg.node(i) {
            CfgNode::Entry => "ENTRY".into(),
            CfgNode::Exit => "EXIT".into(),
            CfgNode::Stmt(s) => format!("{}@{}", ast.kind(s).label(), ast.span(s).line),
        }
    }

    fn edge_list(ast: &Ast, cfg: &FunctionCfg) -> Vec<String> {
        cfg.edges()
            .iter()
            .map(|e| format!("{} -> {} [{}]", label(ast, cfg, e.from), label(ast, cfg, e.to), e.kind.label()))
            .collect()
    }

    #[test]
    fn straight_line_is_a_chain() {
        let (ast, cfg) = cfg_of("def f(a):\n    b = a\n    c = b\n    return c\n");
        assert_eq!(cfg.len(), 5);
        assert_eq!(cfg.branch_edge_count(), 0);
        assert_eq!(
            edge_list(&ast, &cfg),
            [
                "ENTRY -> assign@2 [fallthrough]",
                "assign@2 -> assign@3 [fallthrough]",
                "assign@3 -> return@4 [fallthrough]",
                "return@4 -> EXIT [return]",
            ]
        );
    }

    #[test]
    fn figure_two_diamond() {
        let text = "def f(x, y):\n    x_1 = x*2\n    y_1 = y*2\n    if x.sum() > 10:\n        z = x_1 + y_1\n    else:\n        z = x_1 * y_1\n    return torch.relu(z)\n";
        let (ast, cfg) = cfg_of(text);
        assert_eq!(cfg.len(), 8);
        assert_eq!(
            edge_list(&ast, &cfg),
            [
                "ENTRY -> assign@2 [fallthrough]",
                "assign@2 -> assign@3 [fallthrough]",
                "assign@3 -> if@4 [fallthrough]",
                "if@4 -> assign@5 [true-branch]",
                "if@4 -> assign@7 [false-branch]",
                "assign@5 -> return@8 [fallthrough]",
                "assign@7 -> return@8 [fallthrough]",
                "return@8 -> EXIT [return]",
            ]
        );
    }

    #[test]
    fn early_return_in_branch() {
        let (ast, cfg) = cfg_of("def f(c, a, b):\n    if c: return a\n    return b\n");
        assert_eq!(
            edge_list(&ast, &cfg),
            [
                "ENTRY -> if@2 [fallthrough]",
                "if@2 -> return@2 [true-branch]",
                "return@2 -> EXIT [return]",
                "if@2 -> return@3 [false-branch]",
                "return@3 -> EXIT [return]",
            ]
        );
    }

    #[test]
    fn loops_have_back_edges_and_breaks_exit() {
        let (ast, cfg) = cfg_of(
            "def f(xs):\n    for x in xs:\n        if x:\n            break\n        y = x\n    while y:\n        continue\n    return y\n",
        );
        let edges = edge_list(&ast, &cfg);
        assert!(edges.contains(&"assign@5 -> for@2 [loop-back]".to_string()));
        assert!(edges.contains(&"break@4 -> while@6 [fallthrough]".to_string()));
        assert!(edges.contains(&"continue@7 -> while@6 [loop-back]".to_string()));
        assert!(edges.contains(&"while@6 -> return@8 [false-branch]".to_string()));
    }

    #[test]
    fn unreachable_code_is_excluded_and_reported() {
        let (_, cfg) = cfg_of("def f(a):\n    return a\n    b = 1\n    if b:\n        c = 2\n");
        assert_eq!(cfg.len(), 3);
        assert_eq!(cfg.unreachable.len(), 2);
    }

    #[test]
    fn node_count_is_statements_plus_two() {
        let text = "def f(a):\n    b = a\n    def g():\n        return 1\n    class K:\n        z = 1\n    with ctx():\n        try:\n            b = 2\n        except E:\n            b = 3\n    return b\n";
        let (ast, cfg) = cfg_of(text);
        let stmts = function_statements(&ast, cfg.function);
        assert_eq!(stmts.len(), 8);
        assert_eq!(cfg.len(), stmts.len() + 2);
    }

    #[test]
    fn implicit_fall_off_end_reaches_exit() {
        let (ast, cfg) = cfg_of("def f(a):\n    if a:\n        b = 1\n");
        let edges = edge_list(&ast, &cfg);
        assert!(edges.contains(&"if@2 -> EXIT [false-branch]".to_string()));
        assert!(edges.contains(&"assign@3 -> EXIT [fallthrough]".to_string()));
    }
}

#![allow(dead_code)]

use proptest::prelude::*;

pub mod props;

/// Random function bodies over a tiny statement language.
#[derive(Debug, Clone)]
pub enum Stmt {
    Assign(usize, Vec<usize>),
    If(usize, Vec<Stmt>, Option<Vec<Stmt>>),
    While(usize, Vec<Stmt>),
    Return(usize),
    Pass,
    Break,
}

pub const VARS: [&str; 5] = ["a", "b", "c", "d", "e"];

fn leaf() -> impl Strategy<Value = Stmt> {
    prop_oneof![
        4 => (0..VARS.len(), prop::collection::vec(0..VARS.len(), 0..3)).prop_map(|(t, s)| Stmt::Assign(t, s)),
        1 => (0..VARS.len()).prop_map(Stmt::Return),
        1 => Just(Stmt::Pass),
        1 => Just(Stmt::Break),
    ]
}

pub fn stmt() -> impl Strategy<Value = Stmt> {
    leaf().prop_recursive(3, 16, 3, |inner| {
        let block = prop::collection::vec(inner, 1..3);
        prop_oneof![
            (0..VARS.len(), block.clone(), prop::option::of(block.clone()))
                .prop_map(|(c, t, e)| Stmt::If(c, t, e)),
            (0..VARS.len(), block).prop_map(|(c, b)| Stmt::While(c, b)),
        ]
    })
}

pub fn body() -> impl Strategy<Value = Vec<Stmt>> {
    prop::collection::vec(stmt(), 1..5)
}

fn render_block(stmts: &[Stmt], depth: usize, in_loop: bool, out: &mut String) {
    let pad = "    ".repeat(depth);
    for s in stmts {
        match s {
            Stmt::Assign(t, srcs) => {
                let rhs = if srcs.is_empty() {
                    "1".to_string()
                } else {
                    srcs.iter().map(|&i| VARS[i]).collect::<Vec<_>>().join(" + ")
                };
                out.push_str(&format!("{pad}{} = {rhs}\n", VARS[*t]));
            }
            Stmt::If(c, t, e) => {
                out.push_str(&format!("{pad}if {}:\n", VARS[*c]));
                render_block(t, depth + 1, in_loop, out);
                if let Some(e) = e {
                    out.push_str(&format!("{pad}else:\n"));
                    render_block(e, depth + 1, in_loop, out);
                }
            }
            Stmt::While(c, b) => {
                out.push_str(&format!("{pad}while {}:\n", VARS[*c]));
                render_block(b, depth + 1, true, out);
            }
            Stmt::Return(v) => out.push_str(&format!("{pad}return {}\n", VARS[*v])),
            Stmt::Pass => out.push_str(&format!("{pad}pass\n")),
            Stmt::Break if in_loop => out.push_str(&format!("{pad}break\n")),
            Stmt::Break => out.push_str(&format!("{pad}pass\n")),
        }
    }
}

/// Render as a module with one function `f(a, b)`.
pub fn render(stmts: &[Stmt]) -> String {
    let mut out = String::from("def f(a, b):\n");
    render_block(stmts, 1, false, &mut out);
    out
}

pub fn count_statements(stmts: &[Stmt]) -> usize {
    stmts
        .iter()
        .map(|s| match s {
            Stmt::If(_, t, e) => 1 + count_statements(t) + e.as_deref().map_or(0, count_statements),
            Stmt::While(_, b) => 1 + count_statements(b),
            _ => 1,
        })
        .sum()
}

/// True if no statement follows a `return`/`break` in the same block.
pub fn all_reachable(stmts: &[Stmt]) -> bool {
    for (i, s) in stmts.iter().enumerate() {
        let terminal = matches!(s, Stmt::Return(_) | Stmt::Break);
        if terminal && i + 1 < stmts.len() {
            return false;
        }
        let nested_ok = match s {
            Stmt::If(_, t, e) => all_reachable(t) && e.as_deref().map_or(true, all_reachable),
            Stmt::While(_, b) => all_reachable(b),
            _ => true,
        };
        if !nested_ok {
            return false;
        }
        // An if whose arms both end in return/break makes the rest dead too.
        if let Stmt::If(_, t, Some(e)) = s {
            if ends_in_jump(t) && ends_in_jump(e) && i + 1 < stmts.len() {
                return false;
            }
        }
    }
    true
}

fn ends_in_jump(stmts: &[Stmt]) -> bool {
    match stmts.last() {
        Some(Stmt::Return(_)) | Some(Stmt::Break) => true,
        Some(Stmt::If(_, t, Some(e))) => ends_in_jump(t) && ends_in_jump(e),
        _ => false,
    }
}

/// Random compiled functions whose tensor-dependent ifs are all predicable.
pub mod predicable {
    use proptest::prelude::*;

    const OPERANDS: [&str; 4] = ["x", "y", "a", "b"];
    const TARGETS: [&str; 2] = ["a", "b"];
    const CONDS: [&str; 4] = ["x.sum() > {k}", "x.max() > {k}", "y.mean() < {k}", "x.min() <= {k}"];
    const EXPRS: [&str; 6] = ["{v} + {w}", "{v} * {w}", "{v} - {w}", "torch.relu({v})", "{v}.abs()", "torch.sin({v}) * {w}"];

    #[derive(Debug, Clone)]
    pub enum Arm {
        Assign(usize, usize, usize, usize),
        Nested(Box<Chain>),
    }

    #[derive(Debug, Clone)]
    pub struct Chain {
        pub cond: (usize, i32),
        pub then: Vec<Arm>,
        pub elifs: Vec<((usize, i32), Vec<Arm>)>,
        pub orelse: Option<Vec<Arm>>,
    }

    #[derive(Debug, Clone)]
    pub struct Program {
        pub shadow: bool,
        pub chain: Chain,
    }

    fn cond() -> impl Strategy<Value = (usize, i32)> {
        (0..CONDS.len(), -4..5i32)
    }

    fn assign() -> impl Strategy<Value = Arm> {
        (0..TARGETS.len(), 0..EXPRS.len(), 0..OPERANDS.len(), 0..OPERANDS.len()).prop_map(|(t, e, v, w)| Arm::Assign(t, e, v, w))
    }

    fn chain_with(arm: BoxedStrategy<Arm>) -> impl Strategy<Value = Chain> {
        let block = prop::collection::vec(arm, 1..3);
        (cond(), block.clone(), prop::collection::vec((cond(), block.clone()), 0..2), prop::option::of(block))
            .prop_map(|(cond, then, elifs, orelse)| Chain { cond, then, elifs, orelse })
    }

    pub fn program() -> impl Strategy<Value = Program> {
        let inner = chain_with(assign().boxed());
        let arm = prop_oneof![3 => assign(), 1 => inner.prop_map(|c| Arm::Nested(Box::new(c)))].boxed();
        (any::<bool>(), chain_with(arm)).prop_map(|(shadow, chain)| Program { shadow, chain })
    }

    fn render_cond((c, k): (usize, i32)) -> String {
        CONDS[c].replace("{k}", &k.to_string())
    }

    fn render_block(arms: &[Arm], indent: usize, out: &mut String) {
        let pad = " ".repeat(indent);
        for arm in arms {
            match arm {
                Arm::Assign(t, e, v, w) => {
                    let expr = EXPRS[*e].replace("{v}", OPERANDS[*v]).replace("{w}", OPERANDS[*w]);
                    out.push_str(&format!("{pad}{} = {expr}\n", TARGETS[*t]));
                }
                Arm::Nested(c) => render_chain(c, indent, out),
            }
        }
    }

    fn render_chain(c: &Chain, indent: usize, out: &mut String) {
        let pad = " ".repeat(indent);
        out.push_str(&format!("{pad}if {}:\n", render_cond(c.cond)));
        render_block(&c.then, indent + 4, out);
        for (cond, arms) in &c.elifs {
            out.push_str(&format!("{pad}elif {}:\n", render_cond(*cond)));
            render_block(arms, indent + 4, out);
        }
        if let Some(arms) = &c.orelse {
            out.push_str(&format!("{pad}else:\n"));
            render_block(arms, indent + 4, out);
        }
    }

    pub fn render(p: &Program) -> String {
        let mut out = String::from("import torch\n\n\n@torch.compile\ndef f(x, y):\n    a = x * 2\n    b = y + 1\n");
        if p.shadow {
            out.push_str("    __gm_pred_0 = x * 0\n    __gm_then_a_0 = y\n");
        }
        render_chain(&p.chain, 4, &mut out);
        if p.shadow {
            out.push_str("    return a + b + __gm_pred_0 + __gm_then_a_0\n");
        } else {
            out.push_str("    return a + b\n");
        }
        out
    }

    /// Number of `if`/`elif` heads, which is the number of tags expected.
    pub fn heads(p: &Program) -> usize {
        fn chain(c: &Chain) -> usize {
            1 + c.elifs.len() + block(&c.then) + c.elifs.iter().map(|(_, a)| block(a)).sum::<usize>() + c.orelse.as_deref().map_or(0, block)
        }
        fn block(arms: &[Arm]) -> usize {
            arms.iter().map(|a| if let Arm::Nested(c) = a { chain(c) } else { 0 }).sum()
        }
        chain(&p.chain)
    }
}

//! Arena-allocated syntax tree with byte spans.
//!
//! Child layout per kind (optional children are present only when the
//! matching flag or syntax is there):
//!
//! | kind | children |
//! |------|----------|
//! | `Module`, `Block` | statements |
//! | `FunctionDef` | decorators, `Parameters`, return annotation?, `Block` |
//! | `ClassDef` | decorators, bases/keywords, `Block` |
//! | `If` | condition, `Block`, (`If` elif \| `Block` else)? |
//! | `While` | condition, `Block`, else `Block`? |
//! | `For` | target, iterable, `Block`, else `Block`? |
//! | `Try` | `Block`, handlers, else `Block`?, finally `Block`? |
//! | `Assign` | targets..., value |
//! | `Call` | callee, arguments (positional, `Starred`, `Keyword`) |

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Byte range plus the 1-based line/column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExprContext {
    Load,
    Store,
    Del,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamKind {
    Positional,
    VarArgs,
    KwOnly,
    VarKeywords,
    /// Bare `*` or `/` separator.
    Marker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LitKind {
    Int,
    Float,
    Complex,
    Str,
    Bytes,
    FString,
    True,
    False,
    None,
    Ellipsis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOpKind {
    Add,
    Sub,
    Mult,
    MatMult,
    Div,
    FloorDiv,
    Mod,
    Pow,
    LShift,
    RShift,
    BitOr,
    BitXor,
    BitAnd,
}

impl BinOpKind {
    pub fn symbol(self) -> &'static str {
        use BinOpKind::*;
        match self {
            Add => "+",
            Sub => "-",
            Mult => "*",
            MatMult => "@",
            Div => "/",
            FloorDiv => "//",
            Mod => "%",
            Pow => "**",
            LShift => "<<",
            RShift => ">>",
            BitOr => "|",
            BitXor => "^",
            BitAnd => "&",
        }
    }

    pub fn from_symbol(sym: &str) -> Option<Self> {
        use BinOpKind::*;
        Some(match sym {
            "+" => Add,
            "-" => Sub,
            "*" => Mult,
            "@" => MatMult,
            "/" => Div,
            "//" => FloorDiv,
            "%" => Mod,
            "**" => Pow,
            "<<" => LShift,
            ">>" => RShift,
            "|" => BitOr,
            "^" => BitXor,
            "&" => BitAnd,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOpKind {
    Not,
    Neg,
    Pos,
    Invert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOpKind {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    NotEq,
    Lt,
    LtE,
    Gt,
    GtE,
    Is,
    IsNot,
    In,
    NotIn,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Module,
    Block,
    FunctionDef { name: String, is_async: bool },
    ClassDef { name: String },
    Decorator,
    Parameters,
    Param { name: String, kind: ParamKind, has_annotation: bool, has_default: bool },
    If { is_elif: bool },
    While,
    For { is_async: bool },
    Try { has_else: bool, has_finally: bool },
    ExceptHandler { name: Option<String> },
    With { is_async: bool },
    WithItem { has_target: bool },
    Return,
    Assign,
    AugAssign { op: BinOpKind },
    AnnAssign,
    ExprStmt,
    Pass,
    Break,
    Continue,
    Import,
    ImportFrom { module: String, level: usize },
    Alias { name: String, asname: Option<String> },
    Global { names: Vec<String> },
    Nonlocal { names: Vec<String> },
    Raise,
    Assert,
    Del,

    Name { id: String, ctx: ExprContext },
    Attribute { attr: String, ctx: ExprContext },
    Subscript { ctx: ExprContext },
    Slice { has_lower: bool, has_upper: bool, has_step: bool },
    Call,
    Keyword { arg: Option<String> },
    Starred { ctx: ExprContext },
    Literal { kind: LitKind },
    BinOp { op: BinOpKind },
    UnaryOp { op: UnaryOpKind },
    BoolOp { op: BoolOpKind },
    Compare { ops: Vec<CmpOp> },
    Tuple { ctx: ExprContext, parenthesized: bool },
    List { ctx: ExprContext },
    Dict,
    /// `**mapping` inside a dict display.
    DictUnpack,
    Set,
    IfExp,
    Lambda,
    ListComp,
    SetComp,
    DictComp,
    GeneratorExp,
    Comprehension { is_async: bool },
    Yield,
    YieldFrom,
    Await,
    NamedExpr,
}

impl NodeKind {
    pub fn is_statement(&self) -> bool {
        use NodeKind::*;
        matches!(
            self,
            FunctionDef { .. }
                | ClassDef { .. }
                | If { .. }
                | While
                | For { .. }
                | Try { .. }
                | With { .. }
                | Return
                | Assign
                | AugAssign { .. }
                | AnnAssign
                | ExprStmt
                | Pass
                | Break
                | Continue
                | Import
                | ImportFrom { .. }
                | Global { .. }
                | Nonlocal { .. }
                | Raise
                | Assert
                | Del
        )
    }

    /// Short lowercase label used in dumps and reports.
    pub fn label(&self) -> &'static str {
        use NodeKind::*;
        match self {
            Module => "module",
            Block => "block",
            FunctionDef { .. } => "def",
            ClassDef { .. } => "class",
            Decorator => "decorator",
            Parameters => "parameters",
            Param { .. } => "param",
            If { .. } => "if",
            While => "while",
            For { .. } => "for",
            Try { .. } => "try",
            ExceptHandler { .. } => "except",
            With { .. } => "with",
            WithItem { .. } => "withitem",
            Return => "return",
            Assign => "assign",
            AugAssign { .. } => "augassign",
            AnnAssign => "annassign",
            ExprStmt => "expr",
            Pass => "pass",
            Break => "break",
            Continue => "continue",
            Import => "import",
            ImportFrom { .. } => "importfrom",
            Alias { .. } => "alias",
            Global { .. } => "global",
            Nonlocal { .. } => "nonlocal",
            Raise => "raise",
            Assert => "assert",
            Del => "del",
            Name { .. } => "name",
            Attribute { .. } => "attribute",
            Subscript { .. } => "subscript",
            Slice { .. } => "slice",
            Call => "call",
            Keyword { .. } => "keyword",
            Starred { .. } => "starred",
            Literal { .. } => "literal",
            BinOp { .. } => "binop",
            UnaryOp { .. } => "unaryop",
            BoolOp { .. } => "boolop",
            Compare { .. } => "compare",
            Tuple { .. } => "tuple",
            List { .. } => "list",
            Dict => "dict",
            DictUnpack => "dictunpack",
            Set => "set",
            IfExp => "ifexp",
            Lambda => "lambda",
            ListComp => "listcomp",
            SetComp => "setcomp",
            DictComp => "dictcomp",
            GeneratorExp => "genexp",
            Comprehension { .. } => "comprehension",
            Yield => "yield",
            YieldFrom => "yieldfrom",
            Await => "await",
            NamedExpr => "namedexpr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub span: Span,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
}

/// The syntax tree of one module. Node ids index into the arena; children are
/// allocated before their parents, so the root has the highest id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ast {
    nodes: Vec<Node>,
    root: NodeId,
}

impl Ast {
    pub(crate) fn from_parts(nodes: Vec<Node>, root: NodeId) -> Self {
        Ast { nodes, root }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn get(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.index())
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    /// Mutable access for tree surgery; callers must re-verify afterwards.
    pub fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id.index()]
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id.index()].kind
    }

    pub fn span(&self, id: NodeId) -> Span {
        self.nodes[id.index()].span
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn child(&self, id: NodeId, i: usize) -> NodeId {
        self.nodes[id.index()].children[i]
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn text<'a>(&self, id: NodeId, src: &'a str) -> &'a str {
        let span = self.span(id);
        &src[span.start..span.end]
    }

    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&n| self.parent(n))
    }

    /// Pre-order traversal of `id` and all its descendants.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).iter().rev());
        }
        out
    }

    /// Pre-order traversal that does not enter nested function, class or
    /// lambda bodies (the nested definition node itself is still visited).
    pub fn descendants_in_scope(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            if n != id && introduces_scope(self.kind(n)) {
                continue;
            }
            stack.extend(self.children(n).iter().rev());
        }
        out
    }

    // ---- role accessors -------------------------------------------------

    /// Body block of a function, class, loop, with, try, or if.
    pub fn body(&self, id: NodeId) -> Option<NodeId> {
        let children = self.children(id);
        match self.kind(id) {
            NodeKind::FunctionDef { .. } | NodeKind::ClassDef { .. } => children.last().copied(),
            NodeKind::If { .. } | NodeKind::While => children.get(1).copied(),
            NodeKind::For { .. } => children.get(2).copied(),
            NodeKind::Try { .. } => children.first().copied(),
            NodeKind::With { .. } | NodeKind::ExceptHandler { .. } => children.last().copied(),
            _ => None,
        }
    }

    /// Else arm of an if (another `If` for elif, or a `Block`), or loop else.
    pub fn orelse(&self, id: NodeId) -> Option<NodeId> {
        let children = self.children(id);
        match self.kind(id) {
            NodeKind::If { .. } | NodeKind::While => children.get(2).copied(),
            NodeKind::For { .. } => children.get(3).copied(),
            NodeKind::Try { has_else: true, has_finally } => {
                let idx = children.len() - 1 - usize::from(*has_finally);
                children.get(idx).copied()
            }
            _ => None,
        }
    }

    pub fn condition(&self, id: NodeId) -> Option<NodeId> {
        match self.kind(id) {
            NodeKind::If { .. } | NodeKind::While => self.children(id).first().copied(),
            _ => None,
        }
    }

    pub fn statements(&self, block: NodeId) -> &[NodeId] {
        debug_assert!(matches!(self.kind(block), NodeKind::Block | NodeKind::Module));
        self.children(block)
    }

    /// Parameters of a function or lambda.
    pub fn params(&self, func: NodeId) -> Vec<NodeId> {
        self.children(func)
            .iter()
            .find(|&&c| matches!(self.kind(c), NodeKind::Parameters))
            .map(|&p| self.children(p).to_vec())
            .unwrap_or_default()
    }

    pub fn decorators(&self, def: NodeId) -> Vec<NodeId> {
        self.children(def)
            .iter()
            .copied()
            .filter(|&c| matches!(self.kind(c), NodeKind::Decorator))
            .collect()
    }

    /// Positional (non-keyword, non-starred) arguments of a call.
    pub fn call_args(&self, call: NodeId) -> &[NodeId] {
        &self.children(call)[1..]
    }

    pub fn callee(&self, call: NodeId) -> NodeId {
        self.child(call, 0)
    }

    pub fn name_id(&self, id: NodeId) -> Option<&str> {
        match self.kind(id) {
            NodeKind::Name { id, .. } => Some(id),
            _ => None,
        }
    }

    pub fn def_name(&self, id: NodeId) -> Option<&str> {
        match self.kind(id) {
            NodeKind::FunctionDef { name, .. } | NodeKind::ClassDef { name } => Some(name),
            _ => None,
        }
    }

    /// Dotted path of a pure `a.b.c` chain, e.g. `torch.nn.functional`.
    pub fn dotted_path(&self, id: NodeId) -> Option<String> {
        match self.kind(id) {
            NodeKind::Name { id, .. } => Some(id.clone()),
            NodeKind::Attribute { attr, .. } => {
                let base = self.dotted_path(self.child(id, 0))?;
                Some(format!("{base}.{attr}"))
            }
            _ => None,
        }
    }

    /// Leftmost `Name` of an attribute/call/subscript chain.
    pub fn chain_root(&self, id: NodeId) -> Option<NodeId> {
        match self.kind(id) {
            NodeKind::Name { .. } => Some(id),
            NodeKind::Attribute { .. } | NodeKind::Call | NodeKind::Subscript { .. } => {
                self.chain_root(self.child(id, 0))
            }
            _ => None,
        }
    }

    /// Innermost enclosing function definition.
    pub fn enclosing_function(&self, id: NodeId) -> Option<NodeId> {
        self.ancestors(id)
            .find(|&a| matches!(self.kind(a), NodeKind::FunctionDef { .. }))
    }

    /// The statement that directly contains `id` (or `id` itself).
    pub fn enclosing_statement(&self, id: NodeId) -> Option<NodeId> {
        std::iter::once(id)
            .chain(self.ancestors(id))
            .find(|&a| self.kind(a).is_statement())
    }

    /// All function definitions in pre-order.
    pub fn functions(&self) -> Vec<NodeId> {
        self.descendants(self.root)
            .into_iter()
            .filter(|&n| matches!(self.kind(n), NodeKind::FunctionDef { .. }))
            .collect()
    }

    /// Header expressions of a statement: the parts evaluated when the
    /// statement itself executes, excluding nested statement blocks.
    pub fn statement_exprs(&self, stmt: NodeId) -> Vec<NodeId> {
        let children = self.children(stmt);
        match self.kind(stmt) {
            NodeKind::If { .. } | NodeKind::While => vec![children[0]],
            NodeKind::For { .. } => vec![children[0], children[1]],
            NodeKind::With { .. } => children[..children.len() - 1].to_vec(),
            NodeKind::FunctionDef { .. } => {
                let mut out = self.decorators(stmt);
                for p in self.params(stmt) {
                    out.extend(self.children(p).iter().copied());
                }
                out
            }
            NodeKind::ClassDef { .. } => children[..children.len() - 1].to_vec(),
            NodeKind::Try { .. } => Vec::new(),
            _ => children.to_vec(),
        }
    }
}

pub(crate) fn introduces_scope(kind: &NodeKind) -> bool {
    matches!(
        kind,
        NodeKind::FunctionDef { .. }
            | NodeKind::ClassDef { .. }
            | NodeKind::Lambda
            | NodeKind::ListComp
            | NodeKind::SetComp
            | NodeKind::DictComp
            | NodeKind::GeneratorExp
    )
}
